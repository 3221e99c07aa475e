//! Lattice-graded q-series: truncated series in q whose coefficients live in
//! the group algebra of the D4 weight lattice, bi-graded by a weight k (kept
//! as 2k so half-integers stay integral) and an index m.
//!
//! Every element handled here is invariant under the classical Weyl group, so
//! coefficients are stored collapsed onto dominant orbit representatives.
//! Each element also carries a support shift sigma with the theta-like bound
//! |γ|² ≤ 2m·(e − sigma) for every stored term q^e·e^γ; the bound is stable
//! under all ring operations and drives the candidate enumeration in
//! multiplication.

use crate::qseries::{self, rat, rat_int, PuiseuxSeries, Rat, GRID};
use crate::weyl::{dominant_weights, orbit, orbit_size, GroupAlgebraElement, Weight};
use num_traits::Zero;
use once_cell::sync::Lazy;
use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;
use thiserror::Error;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct JacobiElement {
    weight2: i64,
    index: i64,
    /// exclusive truncation bound for q-exponents, in 24ths
    trunc: i64,
    /// support shift (24ths): stored terms satisfy 3·norm4(γ) ≤ m·(e − shift)
    shift: i64,
    /// (q-exponent in 24ths, dominant orbit representative) -> coefficient
    terms: BTreeMap<(i64, Weight), Rat>,
}

impl JacobiElement {
    pub fn zero(weight2: i64, index: i64, trunc: i64) -> Self {
        JacobiElement { weight2, index, trunc, shift: trunc, terms: BTreeMap::new() }
    }

    /// Embed a scalar series as an index-0 element of the given weight.
    pub fn from_series(s: &PuiseuxSeries, weight2: i64) -> Self {
        let mut terms = BTreeMap::new();
        for (e, c) in s.terms() {
            terms.insert((e, Weight::zero()), c.clone());
        }
        JacobiElement { weight2, index: 0, trunc: s.trunc(), shift: s.val(), terms }
    }

    pub fn weight2(&self) -> i64 {
        self.weight2
    }

    pub fn index(&self) -> i64 {
        self.index
    }

    pub fn trunc(&self) -> i64 {
        self.trunc
    }

    pub fn val(&self) -> i64 {
        self.terms.keys().next().map(|(e, _)| *e).unwrap_or(self.trunc)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(i64, Weight), &Rat)> {
        self.terms.iter()
    }

    /// Re-tag the weight grading without touching coefficients. This is the
    /// bookkeeping form of the omega-power twist: the same series viewed at a
    /// different weight.
    pub fn retag_weight2(&self, weight2: i64) -> Self {
        let mut r = self.clone();
        r.weight2 = weight2;
        r
    }

    pub fn truncate(&self, trunc: i64) -> Self {
        assert!(trunc <= self.trunc, "cannot extend a truncated element");
        JacobiElement {
            weight2: self.weight2,
            index: self.index,
            trunc,
            shift: self.shift.min(trunc),
            terms: self
                .terms
                .range(..(trunc, Weight([i64::MIN, 0, 0, 0])))
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }

    fn insert(&mut self, key: (i64, Weight), c: Rat) {
        if c.is_zero() || key.0 >= self.trunc {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.weight2, o.weight2, "weight mismatch in addition");
        assert_eq!(self.index, o.index, "index mismatch in addition");
        let mut r = self.truncate(self.trunc.min(o.trunc));
        r.shift = self.shift.min(o.shift);
        for (k, c) in &o.terms {
            if k.0 < r.trunc {
                r.insert(*k, c.clone());
            }
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        let mut r = self.clone();
        for c in r.terms.values_mut() {
            *c = -c.clone();
        }
        r
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            let mut r = self.clone();
            r.terms.clear();
            return r;
        }
        let mut r = self.clone();
        for v in r.terms.values_mut() {
            *v = &*v * c;
        }
        r
    }

    /// Multiply by a scalar q-series (weight and index are unchanged).
    pub fn scale_by_series(&self, s: &PuiseuxSeries) -> Self {
        let trunc = (self.trunc + s.val()).min(s.trunc() + self.val());
        let mut r = JacobiElement {
            weight2: self.weight2,
            index: self.index,
            trunc,
            shift: self.shift + s.val(),
            terms: BTreeMap::new(),
        };
        for ((e1, w), c1) in &self.terms {
            for (e2, c2) in s.terms() {
                let e = e1 + e2;
                if e >= trunc {
                    break;
                }
                r.insert((e, *w), c1 * c2);
            }
        }
        r
    }

    /// Multiply by eta^p together with the matching omega-power bookkeeping:
    /// the weight 2k moves by p.
    pub fn mul_eta_omega(&self, p: i64) -> Self {
        let pad = self.trunc - self.val().min(0) + 1;
        let mut r = self.scale_by_series(&qseries::eta_pow(p, pad));
        r.weight2 += p;
        r
    }

    /// Remove the eta automorphic factor implied by the weight: multiply by
    /// eta^{-2k} and view the result at weight 0.
    pub fn untwisted(&self) -> Self {
        let mut r = self.scale_by_series(&qseries::eta_pow(
            -self.weight2,
            self.trunc - self.val().min(0) + self.weight2.abs() + 1,
        ));
        r.weight2 = 0;
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        let index = self.index + o.index;
        let weight2 = self.weight2 + o.weight2;
        let shift = self.shift + o.shift;
        let trunc = (self.trunc + o.val()).min(o.trunc + self.val());
        let mut r = JacobiElement { weight2, index, trunc, shift, terms: BTreeMap::new() };
        if self.is_zero() || o.is_zero() {
            return r;
        }
        // iterate over the smaller fully-expanded factor, look up in the other
        let (a, b) = if self.expanded_size() <= o.expanded_size() {
            (self, o)
        } else {
            (o, self)
        };
        let a_full = a.expand_full_by_exponent();
        let b_full = b.expand_full_map();
        let b_val = b.val();
        for e in (a.val() + b_val)..trunc {
            let norm4_max = if index == 0 { 0 } else { (index * (e - shift)) / 3 };
            for g in dominant_weights(norm4_max, None) {
                let mut acc = Rat::zero();
                for (e1, row) in &a_full {
                    let e2 = e - e1;
                    if e2 < b_val {
                        break;
                    }
                    for (w1, c1) in row {
                        if let Some(c2) = b_full.get(&(e2, g.sub(w1))) {
                            acc += c1 * c2;
                        }
                    }
                }
                r.insert((e, g), acc);
            }
        }
        r
    }

    fn expanded_size(&self) -> usize {
        self.terms.keys().map(|(_, w)| orbit_size(w)).sum()
    }

    fn expand_full_by_exponent(&self) -> Vec<(i64, Vec<(Weight, Rat)>)> {
        let mut out: Vec<(i64, Vec<(Weight, Rat)>)> = Vec::new();
        for ((e, w), c) in &self.terms {
            if out.last().map(|(le, _)| *le != *e).unwrap_or(true) {
                out.push((*e, Vec::new()));
            }
            let row = &mut out.last_mut().unwrap().1;
            for m in orbit(w).iter() {
                row.push((*m, c.clone()));
            }
        }
        out
    }

    fn expand_full_map(&self) -> HashMap<(i64, Weight), Rat> {
        let mut out = HashMap::new();
        for ((e, w), c) in &self.terms {
            for m in orbit(w).iter() {
                out.insert((*e, *m), c.clone());
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        assert!(n >= 1);
        let mut r = self.clone();
        for _ in 1..n {
            r = r.mul(self);
        }
        r
    }

    /// Restriction to the lattice origin: e^γ ↦ 1.
    pub fn q_part(&self) -> PuiseuxSeries {
        let mut s = PuiseuxSeries::zero(self.trunc);
        for ((e, w), c) in &self.terms {
            s.insert_term(*e, c * rat_int(orbit_size(w) as i64));
        }
        s
    }

    /// Coefficient of q^(e24/24) as a full group algebra element.
    pub fn coefficient(&self, e24: i64) -> GroupAlgebraElement {
        assert!(e24 < self.trunc, "coefficient beyond truncation order");
        let mut g = GroupAlgebraElement::zero();
        for ((e, w), c) in &self.terms {
            if *e == e24 {
                for m in orbit(w).iter() {
                    g.insert(*m, c.clone());
                }
            }
        }
        g
    }

    /// Leading (q^0) coefficient; the element must have valuation 0.
    pub fn initial_term(&self) -> GroupAlgebraElement {
        assert_eq!(self.val(), 0, "initial term expects q-valuation 0");
        self.coefficient(0)
    }

    /// The weight-raising heat operator: on an element of weight k and
    /// index m,
    ///   D f = 2m·q(d/dq) f − Δ f + (E2/12)·m·(4−2k)·f,
    /// where Δ scales q^e·e^γ by |γ|². The result has weight k+2.
    pub fn op_d(&self) -> Self {
        let m = self.index;
        let mut r = JacobiElement {
            weight2: self.weight2 + 4,
            index: m,
            trunc: self.trunc,
            shift: self.shift,
            terms: BTreeMap::new(),
        };
        for ((e, w), c) in &self.terms {
            // 2m·(e/24) − norm4/4 = (2m·e − 6·norm4)/24
            let f = Rat::new((2 * m * e - 6 * w.norm4()).into(), GRID.into());
            r.insert((*e, *w), c * f);
        }
        let factor = rat(m * (4 - self.weight2), 12);
        if !factor.is_zero() {
            let e2 = qseries::e2(self.trunc - self.val().min(0) + 1);
            let t = self.scale_by_series(&e2).scale(&factor);
            r = r.add(&t.retag_weight2(r.weight2)).truncate(self.trunc.min(r.trunc));
        }
        r
    }
}

/// The symmetric bracket induced by the heat operator:
/// (F1, F2) ↦ ½ [ D(F1·F2) − D(F1)·F2 − D(F2)·F1 ].
pub fn i_bracket(f1: &JacobiElement, f2: &JacobiElement) -> JacobiElement {
    let p = f1.mul(f2);
    p.op_d()
        .sub(&f1.op_d().mul(f2))
        .sub(&f2.op_d().mul(f1))
        .scale(&rat(1, 2))
}

/// The lifted intersection form on differentials of eta-twisted invariants:
/// for F1 at weight k1 and F2 at weight k2 (each standing for the section
/// eta^{-2k}·(series at weight 0)), returns
///   eta^{4} · (eta/omega)^{-2k1-2k2-4} · bracket(F1, F2),
/// an element of weight 0.
pub fn intersection_form(f1: &JacobiElement, f2: &JacobiElement) -> JacobiElement {
    let g = i_bracket(f1, f2);
    let p = -f1.weight2() - f2.weight2();
    let mut r = g.scale_by_series(&qseries::eta_pow(p, g.trunc - g.val().min(0) + p.abs() + 1));
    r.weight2 = 0;
    r
}

// --- theta cosets and characters ----------------------------------------

/// Lattice coset labels for the four level-one classes:
/// 0 = integer weights with even coordinate sum (the root lattice),
/// 1 = integer weights with odd coordinate sum,
/// 3 = spinor weights with odd coordinate sum,
/// 4 = spinor weights with even coordinate sum.
fn coset_filter(label: u8) -> (bool, i64) {
    // (spinor?, doubled-coordinate sum mod 4)
    match label {
        0 => (false, 0),
        1 => (false, 2),
        3 => (true, 2),
        4 => (true, 0),
        _ => panic!("coset label must be 0, 1, 3 or 4"),
    }
}

/// Theta series of a lattice coset: sum over the coset of q^(|γ|²/2) e^γ,
/// an index-1, weight-0 element.
pub fn theta_coset(label: u8, trunc: i64) -> JacobiElement {
    let (spinor, residue) = coset_filter(label);
    let mut r = JacobiElement::zero(0, 1, trunc);
    r.shift = 0;
    // q-exponent of e^γ is |γ|²/2, i.e. 3·norm4 in 24ths
    let norm4_max = (trunc - 1) / 3;
    for w in dominant_weights(norm4_max, Some(spinor)) {
        if w.0.iter().sum::<i64>().rem_euclid(4) != residue {
            continue;
        }
        r.insert((3 * w.norm4(), w), rat_int(1));
    }
    r
}

static CHARACTER_CACHE: Lazy<Mutex<HashMap<(u8, i64), JacobiElement>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Level-one characters: eta^{-4} times the coset theta series.
pub fn character(label: u8, trunc: i64) -> JacobiElement {
    if let Some(c) = CHARACTER_CACHE.lock().unwrap().get(&(label, trunc)) {
        return c.clone();
    }
    let theta = theta_coset(label, trunc + 5);
    let c = theta
        .scale_by_series(&qseries::eta_pow(-4, trunc + 5))
        .truncate(trunc);
    CHARACTER_CACHE.lock().unwrap().insert((label, trunc), c.clone());
    c
}

/// q-restriction of a character (all e^γ sent to 1).
pub fn character_q(label: u8, trunc: i64) -> PuiseuxSeries {
    character(label, trunc).q_part()
}

// --- the five generators -------------------------------------------------

/// Weight gradings (as 2k) of the generators s0..s4.
pub const GENERATOR_WEIGHT2: [i64; 5] = [0, -4, -8, -8, -12];
/// Index gradings of the generators s0..s4.
pub const GENERATOR_INDEX: [i64; 5] = [1, 1, 1, 1, 2];

static GENERATOR_CACHE: Lazy<Mutex<HashMap<(usize, i64), JacobiElement>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// The generators of the algebra of invariant lattice-graded forms:
///   s0: determinant construction with derivative row, times -6·eta^{-4},
///   s1: plain determinant construction, times eta^{-4},
///   s2: eta^{-8}(-2·χ1 + χ3 + χ4),
///   s3: eta^{-8}(χ3 - χ4),
///   s4: (3·bracket(s3,s3) + bracket(s2,s2))/24.
/// The eta powers come with the omega-degree bookkeeping, so the weights
/// (as 2k) are 0, -4, -8, -8, -12 and the indices 1, 1, 1, 1, 2.
pub fn generator(i: usize, trunc: i64) -> JacobiElement {
    if let Some(g) = GENERATOR_CACHE.lock().unwrap().get(&(i, trunc)) {
        return g.clone();
    }
    let t = trunc + 8;
    let g = match i {
        0 | 1 => {
            let a = character(1, t).add(&character(3, t)).add(&character(4, t));
            let b = character(0, t);
            let aq = a.q_part();
            let bq = b.q_part();
            if i == 0 {
                let det = a
                    .scale_by_series(&bq.q_derive())
                    .sub(&b.scale_by_series(&aq.q_derive()))
                    .retag_weight2(4);
                det.mul_eta_omega(-4).scale(&rat_int(-6))
            } else {
                a.scale_by_series(&bq)
                    .sub(&b.scale_by_series(&aq))
                    .mul_eta_omega(-4)
            }
        }
        2 => character(1, t)
            .scale(&rat_int(-2))
            .add(&character(3, t))
            .add(&character(4, t))
            .mul_eta_omega(-8),
        3 => character(3, t).sub(&character(4, t)).mul_eta_omega(-8),
        4 => {
            let s2 = generator(2, t);
            let s3 = generator(3, t);
            i_bracket(&s3, &s3)
                .scale(&rat_int(3))
                .add(&i_bracket(&s2, &s2))
                .scale(&rat(1, 24))
        }
        _ => panic!("generator index must be 0..=4"),
    };
    assert!(g.trunc >= trunc, "insufficient internal padding");
    assert_eq!(g.weight2, GENERATOR_WEIGHT2[i]);
    assert_eq!(g.index, GENERATOR_INDEX[i]);
    let g = g.truncate(trunc);
    GENERATOR_CACHE.lock().unwrap().insert((i, trunc), g.clone());
    g
}

/// The weight-4 and weight-6 Eisenstein series viewed as index-0 elements.
pub fn eisenstein_element(weight: u8, trunc: i64) -> JacobiElement {
    match weight {
        4 => JacobiElement::from_series(&qseries::e4(trunc), 8),
        6 => JacobiElement::from_series(&qseries::e6(trunc), 12),
        _ => panic!("Eisenstein weight must be 4 or 6"),
    }
}

// --- polynomial expressions in the generators ------------------------------

/// Monomial E4^a · E6^b · s0^c0 · s1^c1 · s2^c2 · s3^c3 · s4^c4.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct GenMonomial {
    pub a: u8,
    pub b: u8,
    pub c: [u8; 5],
}

impl GenMonomial {
    pub fn weight2(&self) -> i64 {
        8 * self.a as i64
            + 12 * self.b as i64
            + (0..5).map(|i| GENERATOR_WEIGHT2[i] * self.c[i] as i64).sum::<i64>()
    }

    pub fn index(&self) -> i64 {
        (0..5).map(|i| GENERATOR_INDEX[i] * self.c[i] as i64).sum::<i64>()
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct GeneratorPolynomial {
    pub terms: BTreeMap<GenMonomial, Rat>,
}

impl GeneratorPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, m: GenMonomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn term(mut self, a: u8, b: u8, c: [u8; 5], coeff: Rat) -> Self {
        self.insert(GenMonomial { a, b, c }, coeff);
        self
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.insert(*m, -c.clone());
        }
        r
    }

    /// Formal derivative with respect to the degree-2 generator s4.
    pub fn d_by_s4(&self) -> Self {
        let mut r = Self::zero();
        for (m, c) in &self.terms {
            if m.c[4] > 0 {
                let mut m2 = *m;
                m2.c[4] -= 1;
                r.insert(m2, c * rat_int(m.c[4] as i64));
            }
        }
        r
    }

    pub fn evaluate(&self, trunc: i64) -> JacobiElement {
        // gradings must be uniform for the sum to make sense
        let mut it = self.terms.keys();
        let first = *it.next().expect("cannot evaluate the empty polynomial");
        let (w2, idx) = (first.weight2(), first.index());
        let mut r = JacobiElement::zero(w2, idx, trunc);
        for (m, c) in &self.terms {
            assert_eq!((m.weight2(), m.index()), (w2, idx), "mixed grading");
            r = r.add(&evaluate_monomial(m, trunc).scale(c).truncate(r.trunc.min(trunc)));
        }
        r
    }
}

static MONOMIAL_CACHE: Lazy<Mutex<HashMap<(GenMonomial, i64), JacobiElement>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn evaluate_monomial(m: &GenMonomial, trunc: i64) -> JacobiElement {
    if let Some(v) = MONOMIAL_CACHE.lock().unwrap().get(&(*m, trunc)) {
        return v.clone();
    }
    // peel off one factor so partial products are shared through the cache
    let v = if let Some(i) = (0..5).rev().find(|i| m.c[*i] > 0) {
        let mut m2 = *m;
        m2.c[i] -= 1;
        evaluate_monomial(&m2, trunc).mul(&generator(i, trunc)).truncate(trunc)
    } else if m.b > 0 {
        let mut m2 = *m;
        m2.b -= 1;
        evaluate_monomial(&m2, trunc).mul(&eisenstein_element(6, trunc)).truncate(trunc)
    } else if m.a > 0 {
        let mut m2 = *m;
        m2.a -= 1;
        evaluate_monomial(&m2, trunc).mul(&eisenstein_element(4, trunc)).truncate(trunc)
    } else {
        let mut r = JacobiElement::zero(0, 0, trunc);
        r.shift = 0;
        r.insert((0, Weight::zero()), rat_int(1));
        r
    };
    MONOMIAL_CACHE.lock().unwrap().insert((*m, trunc), v.clone());
    v
}

/// All generator monomials of the given bi-grading.
pub fn monomials_for(weight2: i64, index: i64) -> Vec<GenMonomial> {
    let mut out = Vec::new();
    if index < 0 {
        return out;
    }
    for c4 in 0..=(index / 2) as u8 {
        let rest = index - 2 * c4 as i64;
        for c0 in 0..=rest as u8 {
            for c1 in 0..=(rest - c0 as i64) as u8 {
                for c2 in 0..=(rest - c0 as i64 - c1 as i64) as u8 {
                    let c3 = (rest - c0 as i64 - c1 as i64 - c2 as i64) as u8;
                    let c = [c0, c1, c2, c3, c4];
                    let w_rem = weight2
                        - (0..5).map(|i| GENERATOR_WEIGHT2[i] * c[i] as i64).sum::<i64>();
                    if w_rem < 0 {
                        continue;
                    }
                    for b in 0..=(w_rem / 12) as u8 {
                        let aw = w_rem - 12 * b as i64;
                        if aw % 8 == 0 {
                            out.push(GenMonomial { a: (aw / 8) as u8, b, c });
                        }
                    }
                }
            }
        }
    }
    out
}

#[derive(Error, Debug)]
pub enum ExpressError {
    #[error("no generator monomial matches weight2={weight2}, index={index}")]
    NoMonomials { weight2: i64, index: i64 },
    #[error("element is not a polynomial in the generators (inconsistent linear system)")]
    Inconsistent,
    #[error("linear system is underdetermined at this truncation order")]
    Underdetermined,
}

/// Express a weight-homogeneous element as a polynomial in E4, E6 and the
/// five generators by exact linear algebra on the collapsed coefficients.
pub fn express_in_generators(f: &JacobiElement) -> Result<GeneratorPolynomial, ExpressError> {
    let monos = monomials_for(f.weight2, f.index);
    if monos.is_empty() {
        return if f.is_zero() {
            Ok(GeneratorPolynomial::zero())
        } else {
            Err(ExpressError::NoMonomials { weight2: f.weight2, index: f.index })
        };
    }
    let values: Vec<JacobiElement> =
        monos.iter().map(|m| evaluate_monomial(m, f.trunc)).collect();
    let t = values
        .iter()
        .map(|v| v.trunc)
        .chain(std::iter::once(f.trunc))
        .min()
        .unwrap();
    // collect equation keys
    let mut keys: std::collections::BTreeSet<(i64, Weight)> = f
        .terms
        .keys()
        .filter(|(e, _)| *e < t)
        .copied()
        .collect();
    for v in &values {
        keys.extend(v.terms.keys().filter(|(e, _)| *e < t).copied());
    }
    let keys: Vec<(i64, Weight)> = keys.into_iter().collect();
    let n = monos.len();
    let mut rows: Vec<Vec<Rat>> = keys
        .iter()
        .map(|k| {
            let mut row: Vec<Rat> = values
                .iter()
                .map(|v| v.terms.get(k).cloned().unwrap_or_else(Rat::zero))
                .collect();
            row.push(f.terms.get(k).cloned().unwrap_or_else(Rat::zero));
            row
        })
        .collect();
    // exact Gaussian elimination
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; n];
    let mut r0 = 0usize;
    for col in 0..n {
        let Some(p) = (r0..rows.len()).find(|r| !rows[*r][col].is_zero()) else {
            continue;
        };
        rows.swap(r0, p);
        let inv = rows[r0][col].clone();
        for r in 0..rows.len() {
            if r != r0 && !rows[r][col].is_zero() {
                let f = &rows[r][col] / &inv;
                for cc in col..=n {
                    let delta = &rows[r0][cc] * &f;
                    rows[r][cc] -= delta;
                }
            }
        }
        pivot_of_col[col] = Some(r0);
        r0 += 1;
    }
    // inconsistent rows?
    for r in r0..rows.len() {
        if !rows[r][n].is_zero() {
            return Err(ExpressError::Inconsistent);
        }
    }
    let mut poly = GeneratorPolynomial::zero();
    for col in 0..n {
        match pivot_of_col[col] {
            Some(r) => {
                let c = &rows[r][n] / &rows[r][col];
                poly.insert(monos[col], c);
            }
            None => {
                // a free column is only acceptable if it plays no role
                return Err(ExpressError::Underdetermined);
            }
        }
    }
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;

    const N: i64 = 4 * GRID;

    /// brute-force full-orbit convolution oracle for multiplication
    fn mul_oracle(a: &JacobiElement, b: &JacobiElement) -> JacobiElement {
        let trunc = (a.trunc + b.val()).min(b.trunc + a.val());
        let mut acc: HashMap<(i64, Weight), Rat> = HashMap::new();
        for ((e1, w1), c1) in &a.terms {
            for m1 in orbit(w1).iter() {
                for ((e2, w2), c2) in &b.terms {
                    if e1 + e2 >= trunc {
                        continue;
                    }
                    for m2 in orbit(w2).iter() {
                        let w = m1.add(m2);
                        *acc.entry((e1 + e2, w)).or_insert_with(Rat::zero) += c1 * c2;
                    }
                }
            }
        }
        let mut r = JacobiElement::zero(a.weight2 + b.weight2, a.index + b.index, trunc);
        r.shift = a.shift + b.shift;
        for ((e, w), c) in acc {
            if w.is_dominant() {
                r.insert((e, w), c);
            }
        }
        r
    }

    #[test]
    fn collapsed_multiplication_matches_full_convolution() {
        let x = character(0, 2 * GRID);
        let y = character(3, 2 * GRID);
        assert_eq!(x.mul(&y), mul_oracle(&x, &y));
        assert_eq!(x.mul(&x), mul_oracle(&x, &x));
        let z = theta_coset(1, 2 * GRID);
        assert_eq!(y.mul(&z), mul_oracle(&y, &z));
    }

    #[test]
    fn character_q_restrictions() {
        // eta^4·(q-restriction of χ0) is the root-lattice theta series
        let x0 = character_q(0, N).mul(&qseries::eta_pow(4, N));
        assert_eq!(x0.coeff(0), rat_int(1));
        assert_eq!(x0.coeff(GRID), rat_int(24));
        assert_eq!(x0.coeff(2 * GRID), rat_int(24));
        assert_eq!(x0.coeff(3 * GRID), rat_int(96));
        let x1 = character_q(1, N).mul(&qseries::eta_pow(4, N));
        assert_eq!(x1.coeff(GRID / 2), rat_int(8));
        assert_eq!(x1.coeff(GRID + GRID / 2), rat_int(32));
        // the two spinor classes restrict to the same series as χ1
        assert_eq!(character_q(3, N).truncate(N - 5), character_q(1, N).truncate(N - 5));
        assert_eq!(character_q(4, N).truncate(N - 5), character_q(1, N).truncate(N - 5));
    }

    #[test]
    fn character_valuations() {
        // leading exponents -4/24 and 8/24
        assert_eq!(character(0, N).val(), -4);
        assert_eq!(character(1, N).val(), 8);
        assert_eq!(character(3, N).val(), 8);
        assert_eq!(character(4, N).val(), 8);
    }

    #[test]
    fn characters_are_killed_by_heat_operator() {
        for label in [0u8, 1, 3, 4] {
            let c = character(label, 2 * GRID);
            let d = c.op_d();
            assert!(d.is_zero(), "D(char {}) = {:?}", label, d.terms.iter().next());
        }
    }

    #[test]
    fn generator_gradings_and_valuations() {
        for i in 0..5 {
            let g = generator(i, 2 * GRID);
            assert_eq!(g.weight2(), GENERATOR_WEIGHT2[i]);
            assert_eq!(g.index(), GENERATOR_INDEX[i]);
            assert_eq!(g.val(), 0, "generator {} should have q-valuation 0", i);
        }
    }

    #[test]
    fn initial_terms_of_first_generators() {
        use crate::weyl::orbit_sum;
        let s2 = generator(2, GRID).initial_term();
        let expected = orbit_sum(&Weight::fundamental(1))
            .scale(&rat_int(-2))
            .add(&orbit_sum(&Weight::fundamental(3)))
            .add(&orbit_sum(&Weight::fundamental(4)));
        assert_eq!(s2, expected);
        let s3 = generator(3, GRID).initial_term();
        let expected = orbit_sum(&Weight::fundamental(3)).sub(&orbit_sum(&Weight::fundamental(4)));
        assert_eq!(s3, expected);
    }

    #[test]
    fn express_recovers_a_known_product() {
        let t = 3 * GRID;
        let s1 = generator(1, t);
        let s2 = generator(2, t);
        let p = s1.mul(&s2);
        let poly = express_in_generators(&p).unwrap();
        let expected = GeneratorPolynomial::zero().term(0, 0, [0, 1, 1, 0, 0], rat_int(1));
        assert_eq!(poly, expected);
    }
}
