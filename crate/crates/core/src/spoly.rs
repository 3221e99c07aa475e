//! Polynomials in the five untwisted generators with q-series coefficients,
//! and one-forms over them. The generators are treated as free variables over
//! the coefficient field of truncated Puiseux series; this is what makes
//! symbolic Gram-matrix computations meaningful, since the untwisted
//! generators are algebraically independent.

use crate::jacobi::{self, GeneratorPolynomial, JacobiElement, GENERATOR_INDEX, GENERATOR_WEIGHT2};
use crate::qseries::{self, rat, rat_int, PuiseuxSeries, Rat};
use once_cell::sync::Lazy;
use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

/// A polynomial in the untwisted generators u0..u4 (the eta-detwisted forms
/// of the five algebra generators) with PuiseuxSeries coefficients.
#[derive(Clone, Debug)]
pub struct SPoly {
    trunc: i64,
    terms: BTreeMap<[u8; 5], PuiseuxSeries>,
}

impl SPoly {
    pub fn zero(trunc: i64) -> Self {
        SPoly { trunc, terms: BTreeMap::new() }
    }

    pub fn from_series(s: &PuiseuxSeries) -> Self {
        let mut r = SPoly::zero(s.trunc());
        r.insert([0; 5], s.clone());
        r
    }

    pub fn constant(c: Rat, trunc: i64) -> Self {
        Self::from_series(&PuiseuxSeries::constant(c, trunc))
    }

    /// The i-th generator as a variable, with coefficient 1.
    pub fn gen(i: usize, trunc: i64) -> Self {
        let mut e = [0u8; 5];
        e[i] = 1;
        let mut r = SPoly::zero(trunc);
        r.insert(e, PuiseuxSeries::one(trunc));
        r
    }

    pub fn trunc(&self) -> i64 {
        self.trunc
    }

    pub fn insert(&mut self, expo: [u8; 5], s: PuiseuxSeries) {
        // Coefficients are only meaningful up to the declared truncation of
        // the whole polynomial: clamp so that monomials absent from the map
        // (implicitly zero) and stored coefficients carry the same precision.
        let s = if s.trunc() > self.trunc { s.truncate(self.trunc) } else { s };
        if s.is_zero() && s.trunc() >= self.trunc {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(expo) {
            Entry::Vacant(v) => {
                if !s.is_zero() || s.trunc() < self.trunc {
                    v.insert(s);
                }
            }
            Entry::Occupied(mut o) => {
                let sum = o.get().add(&s);
                if sum.is_zero() && sum.trunc() >= self.trunc {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u8; 5], &PuiseuxSeries)> {
        self.terms.iter()
    }

    pub fn coeff(&self, expo: &[u8; 5]) -> PuiseuxSeries {
        self.terms.get(expo).cloned().unwrap_or_else(|| PuiseuxSeries::zero(self.trunc))
    }

    /// True when every coefficient series is zero (to its truncation).
    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|s| s.is_zero())
    }

    /// The common effective truncation of all coefficient series.
    pub fn coeff_trunc(&self) -> i64 {
        self.terms.values().map(|s| s.trunc()).min().unwrap_or(self.trunc)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        r.trunc = self.trunc.min(o.trunc);
        for (e, s) in &o.terms {
            r.insert(*e, s.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        let mut r = self.clone();
        for s in r.terms.values_mut() {
            *s = s.neg();
        }
        r
    }

    pub fn scale(&self, c: &Rat) -> Self {
        let mut r = self.clone();
        for s in r.terms.values_mut() {
            *s = s.scale(c);
        }
        r
    }

    pub fn scale_by_series(&self, f: &PuiseuxSeries) -> Self {
        let mut r = SPoly::zero(self.trunc.min(f.trunc()));
        for (e, s) in &self.terms {
            r.insert(*e, s.mul(f));
        }
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = SPoly::zero(self.trunc.min(o.trunc));
        for (e1, s1) in &self.terms {
            for (e2, s2) in &o.terms {
                let mut e = [0u8; 5];
                for i in 0..5 {
                    e[i] = e1[i] + e2[i];
                }
                r.insert(e, s1.mul(s2));
            }
        }
        r
    }

    pub fn pow(&self, n: u32) -> Self {
        assert!(n >= 1);
        let mut r = self.clone();
        for _ in 1..n {
            r = r.mul(self);
        }
        r
    }

    /// Formal partial derivative with respect to the i-th generator.
    pub fn d_gen(&self, i: usize) -> Self {
        let mut r = SPoly::zero(self.trunc);
        for (e, s) in &self.terms {
            if e[i] > 0 {
                let mut e2 = *e;
                e2[i] -= 1;
                r.insert(e2, s.scale(&rat_int(e[i] as i64)));
            }
        }
        r
    }

    /// q d/dq applied to the coefficient series (the generators are held
    /// fixed; this is the tau-direction derivative along dq/q).
    pub fn d_tau(&self) -> Self {
        let mut r = SPoly::zero(self.trunc);
        for (e, s) in &self.terms {
            r.insert(*e, s.q_derive());
        }
        r
    }

    /// The index Euler operator: each monomial is scaled by its total index.
    pub fn euler_index(&self) -> Self {
        let mut r = SPoly::zero(self.trunc);
        for (e, s) in &self.terms {
            let m: i64 = (0..5).map(|i| GENERATOR_INDEX[i] * e[i] as i64).sum();
            r.insert(*e, s.scale(&rat_int(m)));
        }
        r
    }

    /// The uniform index of all (non-zero) monomials; panics if mixed.
    pub fn index(&self) -> i64 {
        let mut idx = None;
        for (e, s) in &self.terms {
            if s.is_zero() {
                continue;
            }
            let m: i64 = (0..5).map(|i| GENERATOR_INDEX[i] * e[i] as i64).sum();
            match idx {
                None => idx = Some(m),
                Some(k) => assert_eq!(k, m, "mixed index grading"),
            }
        }
        idx.unwrap_or(0)
    }

    /// Evaluate at the concrete untwisted generators, as a lattice-graded
    /// element of weight 0. All monomials must share one index grading.
    pub fn eval(&self, trunc: i64) -> JacobiElement {
        let idx = self.index();
        let mut r = JacobiElement::zero(0, idx, trunc.min(self.coeff_trunc()));
        for (e, s) in &self.terms {
            if s.is_zero() {
                continue;
            }
            let m = eval_untwisted_monomial(e, trunc);
            // add() truncates both sides to the common bound
            r = r.add(&m.scale_by_series(s));
        }
        r
    }
}

static UNTWISTED_CACHE: Lazy<Mutex<HashMap<([u8; 5], i64), JacobiElement>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Concrete value of a monomial in the untwisted generators, cached so that
/// partial products are shared.
pub fn eval_untwisted_monomial(e: &[u8; 5], trunc: i64) -> JacobiElement {
    if let Some(v) = UNTWISTED_CACHE.lock().unwrap().get(&(*e, trunc)) {
        return v.clone();
    }
    let v = if let Some(i) = (0..5).rev().find(|i| e[*i] > 0) {
        let mut e2 = *e;
        e2[i] -= 1;
        let gi = jacobi::generator(i, trunc + 2 * GENERATOR_WEIGHT2[i].abs()).untwisted();
        eval_untwisted_monomial(&e2, trunc).mul(&gi).truncate(trunc)
    } else {
        let one = PuiseuxSeries::one(trunc);
        JacobiElement::from_series(&one, 0)
    };
    UNTWISTED_CACHE.lock().unwrap().insert((*e, trunc), v.clone());
    v
}

/// Map a polynomial in the twisted generators and Eisenstein series to the
/// corresponding polynomial in the untwisted generators: every monomial
/// E4^a E6^b s^c of weight 2k and uniform total twist picks up the factor
/// eta^4 coming from the bracket normalization, and the Eisenstein series
/// are detwisted to eta^{-8}E4 and eta^{-12}E6.
pub fn gp_to_spoly(gp: &GeneratorPolynomial, trunc: i64) -> SPoly {
    let pad = trunc + 64;
    let e4 = qseries::e4(pad);
    let e6 = qseries::e6(pad);
    let mut r = SPoly::zero(trunc);
    for (m, c) in &gp.terms {
        // eta^4 * (eta^{-8}E4)^a * (eta^{-12}E6)^b
        let p = 4 - 8 * m.a as i64 - 12 * m.b as i64;
        let mut s = qseries::eta_pow(p, pad);
        for _ in 0..m.a {
            s = s.mul(&e4);
        }
        for _ in 0..m.b {
            s = s.mul(&e6);
        }
        r.insert(m.c, s.scale(c).truncate(trunc));
    }
    r
}

/// The distinguished degree-2 flat invariant expressed in the untwisted
/// generators:
///   u4 = g4 - A/(2^9 3^5) + eta^{-4} E2 (B/(2^9 3^5) + g2^2/144 + g3^2/48),
/// with A = F6 g0^2 - 2 F4^2 g0 g1 + F4 F6 g1^2 and
///      B = F4 g0^2 - 2 F6 g0 g1 + F4^2 g1^2,
/// where F4 = eta^{-8}E4 and F6 = eta^{-12}E6.
pub fn u4_spoly(trunc: i64) -> SPoly {
    let pad = trunc + 64;
    let f4 = qseries::eta_pow(-8, pad).mul(&qseries::e4(pad));
    let f6 = qseries::eta_pow(-12, pad).mul(&qseries::e6(pad));
    let g0 = SPoly::gen(0, trunc);
    let g1 = SPoly::gen(1, trunc);
    let g2 = SPoly::gen(2, trunc);
    let g3 = SPoly::gen(3, trunc);
    let g4 = SPoly::gen(4, trunc);
    let g00 = g0.mul(&g0);
    let g01 = g0.mul(&g1);
    let g11 = g1.mul(&g1);
    let a = g00
        .scale_by_series(&f6)
        .sub(&g01.scale_by_series(&f4.mul(&f4)).scale(&rat_int(2)))
        .add(&g11.scale_by_series(&f4.mul(&f6)));
    let b = g00
        .scale_by_series(&f4)
        .sub(&g01.scale_by_series(&f6).scale(&rat_int(2)))
        .add(&g11.scale_by_series(&f4.mul(&f4)));
    let c = rat(1, 124416); // 2^9 * 3^5
    let inner = b
        .scale(&c)
        .add(&g2.mul(&g2).scale(&rat(1, 144)))
        .add(&g3.mul(&g3).scale(&rat(1, 48)));
    let e2_twist = qseries::eta_pow(-4, pad).mul(&qseries::e2(pad));
    g4.sub(&a.scale(&c)).add(&inner.scale_by_series(&e2_twist))
}

/// A one-form written on the frame {dq/q, du0, ..., du4} with SPoly
/// coefficients, u_i the untwisted generators.
#[derive(Clone, Debug)]
pub struct OneForm {
    pub dqq: SPoly,
    pub ds: [SPoly; 5],
}

impl OneForm {
    pub fn zero(trunc: i64) -> Self {
        OneForm {
            dqq: SPoly::zero(trunc),
            ds: std::array::from_fn(|_| SPoly::zero(trunc)),
        }
    }

    /// Exterior differential of a polynomial in the generators:
    /// d P = sum_i (dP/du_i) du_i + (q dP/dq) dq/q.
    pub fn differential(p: &SPoly) -> Self {
        OneForm {
            dqq: p.d_tau(),
            ds: std::array::from_fn(|i| p.d_gen(i)),
        }
    }

    pub fn basis(i: usize, trunc: i64) -> Self {
        let mut f = OneForm::zero(trunc);
        f.ds[i] = SPoly::constant(rat_int(1), trunc);
        f
    }

    pub fn dqq_form(trunc: i64) -> Self {
        let mut f = OneForm::zero(trunc);
        f.dqq = SPoly::constant(rat_int(1), trunc);
        f
    }

    pub fn add(&self, o: &Self) -> Self {
        OneForm {
            dqq: self.dqq.add(&o.dqq),
            ds: std::array::from_fn(|i| self.ds[i].add(&o.ds[i])),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        OneForm {
            dqq: self.dqq.sub(&o.dqq),
            ds: std::array::from_fn(|i| self.ds[i].sub(&o.ds[i])),
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        OneForm {
            dqq: self.dqq.scale(c),
            ds: std::array::from_fn(|i| self.ds[i].scale(c)),
        }
    }

    pub fn scale_by_series(&self, s: &PuiseuxSeries) -> Self {
        OneForm {
            dqq: self.dqq.scale_by_series(s),
            ds: std::array::from_fn(|i| self.ds[i].scale_by_series(s)),
        }
    }
}

/// Failure modes of [`poly_integrate`].
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum IntegrateError {
    #[error("one-form is not closed: d g_{0}/du_{1} != d g_{1}/du_{0}")]
    NotClosed(usize, usize),
    #[error("integral has a degree-0 component")]
    DegreeZero,
}

/// Integrate a closed polynomial one-form sum_i g_i du_i over the graded ring
/// generated by u0..u4 (degrees 1,1,1,1,2): returns the unique homogeneous-
/// piecewise primitive P with dP = input, computed by the Euler operator
/// (P = sum_i u_i g_i, rescaled by 1/deg on each homogeneous piece).
pub fn poly_integrate(g: &[SPoly; 5]) -> Result<SPoly, IntegrateError> {
    for i in 0..5 {
        for j in (i + 1)..5 {
            if !g[i].d_gen(j).sub(&g[j].d_gen(i)).is_zero() {
                return Err(IntegrateError::NotClosed(i, j));
            }
        }
    }
    let trunc = g.iter().map(|p| p.trunc()).min().unwrap();
    let mut p = SPoly::zero(trunc);
    for i in 0..5 {
        // Euler operator: each du_i picks up the degree of u_i
        p = p.add(&SPoly::gen(i, trunc).mul(&g[i]).scale(&rat_int(GENERATOR_INDEX[i])));
    }
    let mut r = SPoly::zero(trunc);
    for (e, s) in p.terms() {
        let deg: i64 = (0..5).map(|i| GENERATOR_INDEX[i] * e[i] as i64).sum();
        if deg == 0 {
            if s.is_zero() {
                continue;
            }
            return Err(IntegrateError::DegreeZero);
        }
        r.insert(*e, s.scale(&rat(1, deg)));
    }
    Ok(r)
}

/// Symmetric pairing of one-forms given the pairing of the frame:
/// `gram[i][j]` pairs du_i with du_j, `dqq_gen[j]` pairs dq/q with du_j,
/// and dq/q pairs to zero with itself (true for both pairings used here).
pub fn pair_forms(
    a: &OneForm,
    b: &OneForm,
    gram: &[[SPoly; 5]; 5],
    dqq_gen: &[SPoly; 5],
) -> SPoly {
    let trunc = a.dqq.trunc().min(b.dqq.trunc());
    let mut r = SPoly::zero(trunc);
    for i in 0..5 {
        if a.ds[i].is_zero() {
            continue;
        }
        for j in 0..5 {
            if b.ds[j].is_zero() {
                continue;
            }
            r = r.add(&a.ds[i].mul(&b.ds[j]).mul(&gram[i][j]));
        }
    }
    for j in 0..5 {
        if !b.ds[j].is_zero() {
            r = r.add(&a.dqq.mul(&b.ds[j]).mul(&dqq_gen[j]));
        }
        if !a.ds[j].is_zero() {
            r = r.add(&b.dqq.mul(&a.ds[j]).mul(&dqq_gen[j]));
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::GRID;

    #[test]
    fn spoly_ring_and_derivations() {
        let t = 3 * GRID;
        let p = SPoly::gen(0, t).mul(&SPoly::gen(1, t)).add(&SPoly::gen(4, t).scale(&rat(1, 3)));
        // product rule for d_gen on p * p
        let sq = p.mul(&p);
        let lhs = sq.d_gen(0);
        let rhs = p.d_gen(0).mul(&p).scale(&rat_int(2));
        assert!(lhs.sub(&rhs).is_zero());
        // Euler index operator: p is index-homogeneous of index 2
        assert!(p.euler_index().sub(&p.scale(&rat_int(2))).is_zero());
        assert_eq!(p.index(), 2);
    }

    #[test]
    fn spoly_eval_matches_direct_product() {
        let t = 2 * GRID;
        // evaluate g2*g3 and compare against the direct product of the
        // concrete untwisted generators
        let p = SPoly::gen(2, t).mul(&SPoly::gen(3, t));
        let direct = jacobi::generator(2, t + 16)
            .untwisted()
            .mul(&jacobi::generator(3, t + 16).untwisted())
            .truncate(t);
        let got = p.eval(t).truncate(t);
        assert!(got.sub(&direct).is_zero());
    }

    #[test]
    fn integrate_examples() {
        let t = 2 * GRID;
        let g0 = SPoly::gen(0, t);
        let g1 = SPoly::gen(1, t);
        let zero = SPoly::zero(t);
        // 2 u0 du0 -> u0^2
        let form = [g0.scale(&rat_int(2)), zero.clone(), zero.clone(), zero.clone(), zero.clone()];
        let p = poly_integrate(&form).unwrap();
        assert!(p.sub(&g0.mul(&g0)).is_zero());
        // u1 du0 + u0 du1 -> u0 u1
        let form = [g1.clone(), g0.clone(), zero.clone(), zero.clone(), zero.clone()];
        let p = poly_integrate(&form).unwrap();
        assert!(p.sub(&g0.mul(&g1)).is_zero());
        // u1 du0 - u0 du1 is not closed
        let form = [g1.clone(), g0.neg(), zero.clone(), zero.clone(), zero.clone()];
        assert!(matches!(poly_integrate(&form), Err(IntegrateError::NotClosed(0, 1))));
        // dP recovers the form for a mixed-degree polynomial
        let poly = g0.mul(&g1).add(&SPoly::gen(4, t)).add(&g0.pow(4));
        let d = OneForm::differential(&poly);
        let p = poly_integrate(&d.ds).unwrap();
        assert!(p.sub(&poly).is_zero());
    }

    #[test]
    fn u4_leading_structure() {
        let t = 2 * GRID;
        let u4 = u4_spoly(t);
        // the coefficient of the pure g4 variable is exactly 1
        let c = u4.coeff(&[0, 0, 0, 0, 1]);
        assert!(c.sub(&PuiseuxSeries::one(c.trunc())).is_zero());
        // index homogeneity: every monomial has index 2
        assert_eq!(u4.index(), 2);
        assert!(u4.euler_index().sub(&u4.scale(&rat_int(2))).is_zero());
    }
}
