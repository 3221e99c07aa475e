//! The D4 weight lattice, its Weyl group, and the group algebra used as
//! coefficient ring for lattice-graded series.
//!
//! Weights live in the orthonormal frame e1..e4 and are stored with doubled
//! coordinates so that half-integer (spinor) weights stay integral. The
//! classical Weyl group acts by permutations combined with an even number of
//! sign changes (order 192).

use crate::qseries::{rat_int, Rat};
use num_traits::Zero;
use once_cell::sync::Lazy;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Mutex;

/// A weight, stored as doubled orthonormal coordinates.
/// Invariant: all coordinates are even (integer weights) or all odd
/// (spinor weights).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Weight(pub [i64; 4]);

impl Weight {
    pub fn zero() -> Self {
        Weight([0, 0, 0, 0])
    }

    /// Weight with integer orthonormal coordinates.
    pub fn from_ints(c: [i64; 4]) -> Self {
        Weight([2 * c[0], 2 * c[1], 2 * c[2], 2 * c[3]])
    }

    /// Fundamental weights: w1 = e1, w2 = e1+e2, w3 = (e1+e2+e3-e4)/2,
    /// w4 = (e1+e2+e3+e4)/2.
    pub fn fundamental(i: usize) -> Self {
        match i {
            1 => Weight([2, 0, 0, 0]),
            2 => Weight([2, 2, 0, 0]),
            3 => Weight([1, 1, 1, -1]),
            4 => Weight([1, 1, 1, 1]),
            _ => panic!("fundamental weight index must be 1..=4"),
        }
    }

    pub fn is_valid(&self) -> bool {
        let p = self.0[0].rem_euclid(2);
        self.0.iter().all(|c| c.rem_euclid(2) == p)
    }

    pub fn add(&self, o: &Weight) -> Weight {
        Weight([
            self.0[0] + o.0[0],
            self.0[1] + o.0[1],
            self.0[2] + o.0[2],
            self.0[3] + o.0[3],
        ])
    }

    pub fn sub(&self, o: &Weight) -> Weight {
        Weight([
            self.0[0] - o.0[0],
            self.0[1] - o.0[1],
            self.0[2] - o.0[2],
            self.0[3] - o.0[3],
        ])
    }

    pub fn neg(&self) -> Weight {
        Weight([-self.0[0], -self.0[1], -self.0[2], -self.0[3]])
    }

    /// 4·|λ|²: the squared norm of the doubled coordinate vector.
    pub fn norm4(&self) -> i64 {
        self.0.iter().map(|c| c * c).sum()
    }

    /// Exact inner product I(λ, μ).
    pub fn inner(&self, o: &Weight) -> Rat {
        let d: i64 = (0..4).map(|i| self.0[i] * o.0[i]).sum();
        Rat::new(d.into(), 4.into())
    }

    /// |λ|² as an exact rational.
    pub fn norm(&self) -> Rat {
        Rat::new(self.norm4().into(), 4.into())
    }

    /// Dominant iff d1 >= d2 >= d3 >= |d4|.
    pub fn is_dominant(&self) -> bool {
        let d = self.0;
        d[0] >= d[1] && d[1] >= d[2] && d[2] >= d[3].abs()
    }

    /// The dominant representative of the Weyl orbit: absolute values sorted
    /// descending; if an odd number of coordinates was negative (and none is
    /// zero) the smallest entry keeps a minus sign.
    pub fn dominant_rep(&self) -> Weight {
        let mut neg = 0;
        let mut a: Vec<i64> = self
            .0
            .iter()
            .map(|c| {
                if *c < 0 {
                    neg += 1;
                }
                c.abs()
            })
            .collect();
        a.sort_unstable_by(|x, y| y.cmp(x));
        if neg % 2 == 1 {
            a[3] = -a[3];
        }
        Weight([a[0], a[1], a[2], a[3]])
    }

    /// Coefficients (n1..n4) of a dominant weight on the fundamental weights;
    /// panics if the weight is not dominant or not in the weight lattice.
    pub fn fundamental_coords(&self) -> [i64; 4] {
        assert!(self.is_dominant() && self.is_valid());
        let d = self.0;
        let n = [
            (d[0] - d[1]) / 2,
            (d[1] - d[2]) / 2,
            (d[2] - d[3]) / 2,
            (d[2] + d[3]) / 2,
        ];
        assert!(n.iter().all(|x| *x >= 0));
        n
    }

    /// Dominance order: self ⪯ other iff other - self is a nonnegative
    /// rational combination of the simple roots e1-e2, e2-e3, e3-e4, e3+e4.
    pub fn dominance_leq(&self, other: &Weight) -> bool {
        let v = other.sub(self).0;
        let s1 = v[0];
        let s2 = v[0] + v[1];
        let s3 = v[0] + v[1] + v[2];
        s1 >= 0 && s2 >= 0 && s3 - v[3] >= 0 && s3 + v[3] >= 0
    }
}

/// The 192 group elements as (permutation, signs with even number of -1).
pub fn weyl_group() -> &'static Vec<([usize; 4], [i64; 4])> {
    static GROUP: Lazy<Vec<([usize; 4], [i64; 4])>> = Lazy::new(|| {
        let perms: Vec<[usize; 4]> = {
            let mut v = Vec::new();
            let mut idx = [0usize, 1, 2, 3];
            permute(&mut idx, 0, &mut v);
            v
        };
        let mut out = Vec::with_capacity(192);
        for p in &perms {
            for mask in 0..16u32 {
                if mask.count_ones() % 2 == 0 {
                    let signs = [
                        if mask & 1 != 0 { -1 } else { 1 },
                        if mask & 2 != 0 { -1 } else { 1 },
                        if mask & 4 != 0 { -1 } else { 1 },
                        if mask & 8 != 0 { -1 } else { 1 },
                    ];
                    out.push((*p, signs));
                }
            }
        }
        out
    });
    &GROUP
}

fn permute(idx: &mut [usize; 4], k: usize, out: &mut Vec<[usize; 4]>) {
    if k == 4 {
        out.push(*idx);
        return;
    }
    for i in k..4 {
        idx.swap(k, i);
        permute(idx, k + 1, out);
        idx.swap(k, i);
    }
}

pub fn apply(g: &([usize; 4], [i64; 4]), w: &Weight) -> Weight {
    let (p, s) = g;
    Weight([
        s[0] * w.0[p[0]],
        s[1] * w.0[p[1]],
        s[2] * w.0[p[2]],
        s[3] * w.0[p[3]],
    ])
}

static ORBIT_CACHE: Lazy<Mutex<HashMap<Weight, std::sync::Arc<Vec<Weight>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// The Weyl orbit of a weight (deduplicated, sorted), cached by dominant rep.
pub fn orbit(w: &Weight) -> std::sync::Arc<Vec<Weight>> {
    let key = w.dominant_rep();
    if let Some(o) = ORBIT_CACHE.lock().unwrap().get(&key) {
        return o.clone();
    }
    let set: BTreeSet<Weight> = weyl_group().iter().map(|g| apply(g, &key)).collect();
    let o = std::sync::Arc::new(set.into_iter().collect::<Vec<_>>());
    ORBIT_CACHE.lock().unwrap().insert(key, o.clone());
    o
}

pub fn orbit_size(w: &Weight) -> usize {
    orbit(w).len()
}

// --- group algebra -----------------------------------------------------

/// An element of the group algebra Q[P] of the weight lattice:
/// a finite sum of terms c · e^λ.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct GroupAlgebraElement {
    terms: BTreeMap<Weight, Rat>,
}

impl GroupAlgebraElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rat) -> Self {
        Self::monomial(Weight::zero(), c)
    }

    pub fn monomial(w: Weight, c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(w, c);
        }
        GroupAlgebraElement { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Weight, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, w: &Weight) -> Rat {
        self.terms.get(w).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn insert(&mut self, w: Weight, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(w) {
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
        let mut r = self.clone();
        for (w, c) in &o.terms {
            r.insert(*w, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (w, c) in &o.terms {
            r.insert(*w, -c.clone());
        }
        r
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        GroupAlgebraElement {
            terms: self.terms.iter().map(|(w, k)| (*w, k * c)).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &o.terms {
                r.insert(w1.add(w2), c1 * c2);
            }
        }
        r
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut r = Self::constant(rat_int(1));
        for _ in 0..n {
            r = r.mul(self);
        }
        r
    }

    /// e^λ ↦ I(λ,λ)·e^λ, extended linearly (the lattice Laplacian).
    pub fn laplacian(&self) -> Self {
        GroupAlgebraElement {
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| w.norm4() != 0)
                .map(|(w, c)| (*w, c * w.norm()))
                .collect(),
        }
    }

    /// Sum of all coefficients (the image under e^λ ↦ 1).
    pub fn coefficient_sum(&self) -> Rat {
        let mut s = Rat::zero();
        for c in self.terms.values() {
            s += c;
        }
        s
    }

    pub fn is_weyl_invariant(&self) -> bool {
        for (w, c) in &self.terms {
            let rep = w.dominant_rep();
            if self.coeff(&rep) != *c {
                return false;
            }
        }
        true
    }

    /// Collapse an invariant element to coefficients on dominant orbit
    /// representatives; returns None if not invariant.
    pub fn to_orbit_basis(&self) -> Option<BTreeMap<Weight, Rat>> {
        if !self.is_weyl_invariant() {
            return None;
        }
        Some(
            self.terms
                .iter()
                .filter(|(w, _)| w.is_dominant())
                .map(|(w, c)| (*w, c.clone()))
                .collect(),
        )
    }
}

/// Orbit sum S(λ): sum of e^μ over the Weyl orbit of λ.
pub fn orbit_sum(w: &Weight) -> GroupAlgebraElement {
    let mut r = GroupAlgebraElement::zero();
    for m in orbit(w).iter() {
        r.insert(*m, rat_int(1));
    }
    r
}

/// Value of the monomial S(w1)^n1 S(w2)^n2 S(w3)^n3 S(w4)^n4.
pub fn orbit_monomial(n: &[i64; 4]) -> GroupAlgebraElement {
    let mut r = GroupAlgebraElement::constant(rat_int(1));
    for i in 0..4 {
        let s = orbit_sum(&Weight::fundamental(i + 1));
        for _ in 0..n[i] {
            r = r.mul(&s);
        }
    }
    r
}

/// Rewrite a Weyl-invariant element as a polynomial in the fundamental orbit
/// sums: returns coefficients keyed by (n1,n2,n3,n4). Works by repeatedly
/// eliminating a dominance-maximal support weight; the product of orbit sums
/// matching it has that weight with coefficient exactly 1 and everything else
/// strictly below in dominance order.
pub fn orbit_to_monomial(x: &GroupAlgebraElement) -> Option<BTreeMap<[i64; 4], Rat>> {
    let mut rem = x.to_orbit_basis()?;
    let mut out: BTreeMap<[i64; 4], Rat> = BTreeMap::new();
    while let Some((&top, _)) = rem.iter().max_by_key(|(w, _)| (w.norm4(), **w)) {
        let c = rem[&top].clone();
        let n = top.fundamental_coords();
        let mono = orbit_monomial(&n).to_orbit_basis().expect("orbit sums are invariant");
        for (w, mc) in mono {
            let e = rem.entry(w).or_insert_with(Rat::zero);
            *e -= &c * mc;
            if e.is_zero() {
                rem.remove(&w);
            }
        }
        out.insert(n, c);
    }
    Some(out)
}

/// Inverse of `orbit_to_monomial`: expand a polynomial in the fundamental
/// orbit sums back into the group algebra.
pub fn monomial_to_group_algebra(p: &BTreeMap<[i64; 4], Rat>) -> GroupAlgebraElement {
    let mut r = GroupAlgebraElement::zero();
    for (n, c) in p {
        r = r.add(&orbit_monomial(n).scale(c));
    }
    r
}

/// Dominant weights λ with 4|λ|² <= norm4_max, optionally restricted to a
/// parity class (doubled coordinates all even / all odd).
pub fn dominant_weights(norm4_max: i64, spinor: Option<bool>) -> Vec<Weight> {
    let mut out = Vec::new();
    let lim = (0..).take_while(|d| d * d <= norm4_max).last().unwrap_or(0);
    for d1 in 0..=lim {
        for d2 in 0..=d1 {
            for d3 in 0..=d2 {
                for d4 in -d3..=d3 {
                    let w = Weight([d1, d2, d3, d4]);
                    if w.norm4() > norm4_max || !w.is_valid() {
                        continue;
                    }
                    if let Some(sp) = spinor {
                        if (d1.rem_euclid(2) == 1) != sp {
                            continue;
                        }
                    }
                    out.push(w);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::rat;

    #[test]
    fn group_order_is_192() {
        assert_eq!(weyl_group().len(), 192);
    }

    #[test]
    fn fundamental_orbit_sizes() {
        let sizes: Vec<usize> = (1..=4)
            .map(|i| orbit_size(&Weight::fundamental(i)))
            .collect();
        assert_eq!(sizes, vec![8, 24, 8, 8]);
    }

    #[test]
    fn fundamental_norms() {
        // |w1|^2 = 1, |w2|^2 = 2, |w3|^2 = |w4|^2 = 1
        assert_eq!(Weight::fundamental(1).norm(), rat_int(1));
        assert_eq!(Weight::fundamental(2).norm(), rat_int(2));
        assert_eq!(Weight::fundamental(3).norm(), rat_int(1));
        assert_eq!(Weight::fundamental(4).norm(), rat_int(1));
        assert_eq!(
            Weight::fundamental(3).inner(&Weight::fundamental(4)),
            rat(1, 2)
        );
    }

    #[test]
    fn dominant_rep_is_in_orbit_and_dominant() {
        let w = Weight([-3, 1, 5, -1]);
        let rep = w.dominant_rep();
        assert!(rep.is_dominant());
        assert!(orbit(&w).contains(&rep));
        assert_eq!(rep, Weight([5, 3, 1, 1])); // two sign flips: even
        assert_eq!(Weight([-3, 1, 5, 1]).dominant_rep(), Weight([5, 3, 1, -1]));
    }

    #[test]
    fn dominance_examples() {
        let w1 = Weight::fundamental(1);
        let w2 = Weight::fundamental(2);
        let w3 = Weight::fundamental(3);
        assert!(w1.dominance_leq(&w2));
        assert!(!w2.dominance_leq(&w1));
        // w1 and w3 lie in different lattice cosets but w3 ⪯ w1 fails and
        // w1 ⪯ w3 fails (the difference is not a nonnegative root combination)
        assert!(!w1.dominance_leq(&w3));
        assert!(!w3.dominance_leq(&w1));
        assert!(Weight::zero().dominance_leq(&w2));
    }

    #[test]
    fn orbit_sum_products_collapse_triangularly() {
        // S(w1)·S(w1) has top weight 2w1 with coefficient 1
        let s = orbit_sum(&Weight::fundamental(1));
        let p = s.mul(&s).to_orbit_basis().unwrap();
        assert_eq!(p[&Weight([4, 0, 0, 0])], rat_int(1));
        // and contains S(w2) (weights like e1+e2) and a constant (8 = pairs
        // summing to zero)
        assert_eq!(p[&Weight([2, 2, 0, 0])], rat_int(2));
        assert_eq!(p[&Weight::zero()], rat_int(8));
    }

    #[test]
    fn change_of_basis_roundtrip() {
        let x = orbit_sum(&Weight([4, 2, 2, 0]))
            .scale(&rat(3, 7))
            .add(&orbit_sum(&Weight([3, 1, 1, -1])))
            .add(&orbit_sum(&Weight::fundamental(2)).scale(&rat(-5, 2)))
            .add(&GroupAlgebraElement::constant(rat_int(11)));
        let mono = orbit_to_monomial(&x).unwrap();
        let back = monomial_to_group_algebra(&mono);
        assert_eq!(back, x);
    }

    #[test]
    fn laplacian_eigenvalues() {
        let s = orbit_sum(&Weight::fundamental(2));
        assert_eq!(s.laplacian(), s.scale(&rat_int(2)));
    }

    #[test]
    fn dominant_weight_enumeration_matches_orbit_counts() {
        // number of lattice points of norm <= r^2 equals the sum of orbit
        // sizes over dominant representatives
        let norm4_max = 4 * 6;
        let doms = dominant_weights(norm4_max, None);
        let total: usize = doms.iter().map(orbit_size).sum();
        // brute-force count over doubled coordinates
        let mut count = 0usize;
        let lim = 5i64;
        for a in -lim..=lim {
            for b in -lim..=lim {
                for c in -lim..=lim {
                    for d in -lim..=lim {
                        let w = Weight([a, b, c, d]);
                        if w.is_valid() && w.norm4() <= norm4_max {
                            count += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(total, count);
    }
}
