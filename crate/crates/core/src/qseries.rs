//! Truncated Puiseux series in q with exponents in (1/24)·Z and exact
//! rational coefficients.
//!
//! Exponents are stored as integer multiples of 1/24, which is fine enough
//! for every object in this crate (eta has valuation 1/24, theta constants
//! live on the 1/8 and 1/2 grids, character branches on the 1/6 and 1/12
//! grids). Every series carries its own truncation order: coefficients are
//! known exactly for all exponents strictly below `trunc`/24.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

pub type Rat = num_rational::BigRational;

/// Shorthand for an exact rational from machine integers.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Scale factor of the exponent grid: exponents are `e24 / GRID`.
pub const GRID: i64 = 24;

#[derive(Clone, PartialEq, Eq)]
pub struct PuiseuxSeries {
    /// exponent (in 24ths) -> coefficient; zero coefficients are never stored
    coeffs: BTreeMap<i64, Rat>,
    /// exclusive truncation bound, in 24ths
    trunc: i64,
}

impl PuiseuxSeries {
    pub fn zero(trunc: i64) -> Self {
        PuiseuxSeries { coeffs: BTreeMap::new(), trunc }
    }

    pub fn one(trunc: i64) -> Self {
        Self::monomial(0, rat_int(1), trunc)
    }

    pub fn constant(c: Rat, trunc: i64) -> Self {
        Self::monomial(0, c, trunc)
    }

    /// c * q^(e24/24)
    pub fn monomial(e24: i64, c: Rat, trunc: i64) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() && e24 < trunc {
            coeffs.insert(e24, c);
        }
        PuiseuxSeries { coeffs, trunc }
    }

    pub fn trunc(&self) -> i64 {
        self.trunc
    }

    /// Valuation in 24ths; for a series with no stored terms this is the
    /// truncation bound (the series is indistinguishable from zero).
    pub fn val(&self) -> i64 {
        self.coeffs.keys().next().copied().unwrap_or(self.trunc)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, e24: i64) -> Rat {
        assert!(e24 < self.trunc, "coefficient beyond truncation order");
        self.coeffs.get(&e24).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Rat)> {
        self.coeffs.iter().map(|(e, c)| (*e, c))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn truncate(&self, trunc: i64) -> Self {
        assert!(trunc <= self.trunc, "cannot extend a truncated series");
        let coeffs = self
            .coeffs
            .range(..trunc)
            .map(|(e, c)| (*e, c.clone()))
            .collect();
        PuiseuxSeries { coeffs, trunc }
    }

    /// Add c·q^(e24/24) in place (no-op beyond the truncation bound).
    pub fn insert_term(&mut self, e24: i64, c: Rat) {
        self.insert(e24, c);
    }

    fn insert(&mut self, e24: i64, c: Rat) {
        if e24 >= self.trunc || c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.coeffs.entry(e24) {
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

    pub fn add(&self, other: &Self) -> Self {
        let mut r = self.truncate(self.trunc.min(other.trunc));
        for (e, c) in other.coeffs.range(..r.trunc) {
            r.insert(*e, c.clone());
        }
        r
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        PuiseuxSeries {
            coeffs: self.coeffs.iter().map(|(e, c)| (*e, -c.clone())).collect(),
            trunc: self.trunc,
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero(self.trunc);
        }
        PuiseuxSeries {
            coeffs: self.coeffs.iter().map(|(e, k)| (*e, k * c)).collect(),
            trunc: self.trunc,
        }
    }

    /// Multiply by q^(e24/24).
    pub fn shift(&self, e24: i64) -> Self {
        PuiseuxSeries {
            coeffs: self.coeffs.iter().map(|(e, c)| (*e + e24, c.clone())).collect(),
            trunc: self.trunc + e24,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let trunc = (self.trunc + other.val()).min(other.trunc + self.val());
        let mut r = Self::zero(trunc);
        for (e1, c1) in &self.coeffs {
            for (e2, c2) in &other.coeffs {
                let e = e1 + e2;
                if e >= trunc {
                    break;
                }
                r.insert(e, c1 * c2);
            }
        }
        r
    }

    /// Multiplicative inverse. The leading coefficient must be nonzero
    /// (true for every unit-leading series here); relative precision is
    /// preserved.
    pub fn inv(&self) -> Self {
        let v = self.val();
        assert!(!self.is_zero(), "cannot invert a series that is zero to its truncation order");
        let rel = self.trunc - v; // relative precision
        let lead = self.coeffs[&v].clone();
        // u = self / (lead * q^(v/24)), a unit with constant term 1
        let u: BTreeMap<i64, Rat> = self
            .coeffs
            .iter()
            .map(|(e, c)| (*e - v, c / &lead))
            .collect();
        let mut inv_u: BTreeMap<i64, Rat> = BTreeMap::new();
        inv_u.insert(0, Rat::one());
        for e in 1..rel {
            let mut acc = Rat::zero();
            for (j, uc) in u.range(1..=e) {
                if let Some(ic) = inv_u.get(&(e - j)) {
                    acc += uc * ic;
                }
            }
            if !acc.is_zero() {
                inv_u.insert(e, -acc);
            }
        }
        let coeffs = inv_u
            .into_iter()
            .map(|(e, c)| (e - v, c / &lead))
            .collect();
        PuiseuxSeries { coeffs, trunc: rel - v }
    }

    pub fn div(&self, other: &Self) -> Self {
        self.mul(&other.inv())
    }

    pub fn pow(&self, n: i64) -> Self {
        if n == 0 {
            return Self::one(self.trunc);
        }
        let (base, mut e) = if n < 0 {
            (self.inv(), (-n) as u64)
        } else {
            (self.clone(), n as u64)
        };
        let mut result: Option<Self> = None;
        let mut p = base;
        while e > 0 {
            if e & 1 == 1 {
                result = Some(match result {
                    None => p.clone(),
                    Some(r) => r.mul(&p),
                });
            }
            e >>= 1;
            if e > 0 {
                p = p.mul(&p);
            }
        }
        result.unwrap()
    }

    /// q·d/dq: each term c·q^e maps to (e·c)·q^e.
    pub fn q_derive(&self) -> Self {
        PuiseuxSeries {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(e, _)| **e != 0)
                .map(|(e, c)| (*e, c * rat(*e, GRID)))
                .collect(),
            trunc: self.trunc,
        }
    }
}

impl fmt::Debug for PuiseuxSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if *e == 0 {
                write!(f, "{}", c)?;
            } else if e % GRID == 0 {
                write!(f, "{}*q^{}", c, e / GRID)?;
            } else {
                write!(f, "{}*q^({}/{})", c, e, GRID)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(q^({}/{}))", self.trunc, GRID)
    }
}

// --- classical series -------------------------------------------------

/// Euler product prod_{n>=1} (1 - q^n), via the pentagonal number theorem.
pub fn euler_product(trunc: i64) -> PuiseuxSeries {
    let mut s = PuiseuxSeries::zero(trunc);
    let mut k: i64 = 0;
    loop {
        // generalized pentagonal numbers k(3k-1)/2 for k = 0, 1, -1, 2, -2, ...
        let mut done = true;
        for kk in [k, -k] {
            let p = kk * (3 * kk - 1) / 2;
            if GRID * p < trunc {
                done = false;
                let sign = if kk.rem_euclid(2) == 0 { 1 } else { -1 };
                s.insert(GRID * p, rat_int(sign));
            }
            if kk == 0 {
                break;
            }
        }
        if done && k > 0 {
            break;
        }
        k += 1;
    }
    s
}

/// Dedekind eta = q^(1/24) * prod (1 - q^n).
pub fn eta(trunc: i64) -> PuiseuxSeries {
    euler_product(trunc - 1).shift(1)
}

pub fn eta_pow(p: i64, trunc: i64) -> PuiseuxSeries {
    // pad so that the stated truncation survives the valuation shift p/24
    let e = eta(trunc + p.abs() + 1);
    e.pow(p).truncate(trunc)
}

fn eisenstein(weight: u32, scale: i64, trunc: i64) -> PuiseuxSeries {
    let mut s = PuiseuxSeries::one(trunc);
    let nmax = if trunc > 0 { (trunc - 1) / GRID } else { 0 };
    for n in 1..=nmax {
        let mut sigma = BigInt::zero();
        for d in 1..=n {
            if n % d == 0 {
                sigma += BigInt::from(d).pow(weight - 1);
            }
        }
        s.insert(GRID * n, Rat::from_integer(sigma * BigInt::from(scale)));
    }
    s
}

/// E2 = 1 - 24 sum sigma_1(n) q^n (quasi-modular of weight 2).
pub fn e2(trunc: i64) -> PuiseuxSeries {
    eisenstein(2, -24, trunc)
}

/// E4 = 1 + 240 sum sigma_3(n) q^n.
pub fn e4(trunc: i64) -> PuiseuxSeries {
    eisenstein(4, 240, trunc)
}

/// E6 = 1 - 504 sum sigma_5(n) q^n.
pub fn e6(trunc: i64) -> PuiseuxSeries {
    eisenstein(6, -504, trunc)
}

/// Theta constants: theta2 = sum q^((n-1/2)^2/2), theta3 = sum q^(n^2/2),
/// theta4 = sum (-1)^n q^(n^2/2) (sums over all integers n).
pub fn theta(i: u8, trunc: i64) -> PuiseuxSeries {
    let mut s = PuiseuxSeries::zero(trunc);
    match i {
        2 => {
            // exponent (2n-1)^2/8 = 3(2n-1)^2 / 24, multiplicity 2
            let mut n = 1i64;
            while 3 * (2 * n - 1) * (2 * n - 1) < trunc {
                s.insert(3 * (2 * n - 1) * (2 * n - 1), rat_int(2));
                n += 1;
            }
        }
        3 | 4 => {
            s.insert(0, rat_int(1));
            let mut n = 1i64;
            while 12 * n * n < trunc {
                let c = if i == 4 && n % 2 == 1 { -2 } else { 2 };
                s.insert(12 * n * n, rat_int(c));
                n += 1;
            }
        }
        _ => panic!("theta index must be 2, 3 or 4"),
    }
    s
}

/// xi_i = 2 (log theta_i)' = 2 theta_i'/theta_i  (' = q d/dq).
pub fn xi(i: u8, trunc: i64) -> PuiseuxSeries {
    let t = theta(i, trunc + GRID);
    t.q_derive().div(&t).scale(&rat_int(2)).truncate(trunc)
}

/// eta'/eta = E2/24.
pub fn eta_log_derive(trunc: i64) -> PuiseuxSeries {
    e2(trunc).scale(&rat(1, 24))
}

/// Serre derivative at weight k: f' - (k/12) E2 f.
pub fn serre_derivative(f: &PuiseuxSeries, k: &Rat) -> PuiseuxSeries {
    let t = f.trunc();
    f.q_derive()
        .sub(&e2(t - f.val().min(0)).mul(f).scale(&(k * rat(1, 12))))
        .truncate(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    const N: i64 = 10 * GRID;

    /// brute-force oracle for prod (1 - q^n)
    fn euler_oracle(trunc: i64) -> PuiseuxSeries {
        let mut s = PuiseuxSeries::one(trunc);
        let mut n = 1;
        while GRID * n < trunc {
            let f = PuiseuxSeries::one(trunc).sub(&PuiseuxSeries::monomial(GRID * n, rat_int(1), trunc));
            s = s.mul(&f);
            n += 1;
        }
        s.truncate(trunc)
    }

    #[test]
    fn pentagonal_matches_brute_force_product() {
        assert_eq!(euler_product(N), euler_oracle(N));
    }

    #[test]
    fn eta_valuation_and_leading_terms() {
        let e = eta(N);
        assert_eq!(e.val(), 1);
        // q^(1/24) (1 - q - q^2 + q^5 + q^7 - ...)
        assert_eq!(e.coeff(1), rat_int(1));
        assert_eq!(e.coeff(1 + GRID), rat_int(-1));
        assert_eq!(e.coeff(1 + 2 * GRID), rat_int(-1));
        assert_eq!(e.coeff(1 + 5 * GRID), rat_int(1));
    }

    #[test]
    fn mul_div_roundtrip() {
        let a = eta(N).pow(3).add(&e4(N));
        let b = theta(3, N).add(&PuiseuxSeries::monomial(5, rat(7, 3), N));
        let q = a.mul(&b).div(&b);
        assert_eq!(q.truncate(q.trunc().min(N - 2)), a.truncate(q.trunc().min(N - 2)));
    }

    #[test]
    fn q_derive_product_rule() {
        let a = e4(N);
        let b = theta(2, N);
        let lhs = a.mul(&b).q_derive();
        let rhs = a.q_derive().mul(&b).add(&a.mul(&b.q_derive()));
        assert_eq!(lhs, rhs.truncate(lhs.trunc()));
    }

    #[test]
    fn ramanujan_derivative_identities() {
        let (e2s, e4s, e6s) = (e2(N), e4(N), e6(N));
        // E2' = (E2^2 - E4)/12
        assert_eq!(
            e2s.q_derive(),
            e2s.mul(&e2s).sub(&e4s).scale(&rat(1, 12)).truncate(N)
        );
        // E4' = (E2 E4 - E6)/3
        assert_eq!(
            e4s.q_derive(),
            e2s.mul(&e4s).sub(&e6s).scale(&rat(1, 3)).truncate(N)
        );
        // E6' = (E2 E6 - E4^2)/2
        assert_eq!(
            e6s.q_derive(),
            e2s.mul(&e6s).sub(&e4s.mul(&e4s)).scale(&rat(1, 2)).truncate(N)
        );
    }

    #[test]
    fn e2_is_24_times_eta_log_derivative() {
        let e = eta(N);
        assert_eq!(e.q_derive().div(&e).scale(&rat_int(24)).truncate(N - 1), e2(N - 1));
    }

    #[test]
    fn jacobi_theta_quartic_relation() {
        // theta3^4 = theta2^4 + theta4^4
        let t2 = theta(2, N).pow(4);
        let t3 = theta(3, N).pow(4);
        let t4 = theta(4, N).pow(4);
        assert_eq!(t3, t2.add(&t4).truncate(t3.trunc()));
    }

    #[test]
    fn theta_product_gives_eta_cube() {
        // theta2 theta3 theta4 = 2 eta^3
        let lhs = theta(2, N).mul(&theta(3, N)).mul(&theta(4, N));
        let rhs = eta(N).pow(3).scale(&rat_int(2));
        assert_eq!(lhs, rhs.truncate(lhs.trunc()));
    }

    #[test]
    fn xi_leading_terms() {
        // xi2 = 1/4 + 2q + ..., xi3 = 2 q^(1/2) + ..., xi4 = -2 q^(1/2) + ...
        let x2 = xi(2, N);
        assert_eq!(x2.coeff(0), rat(1, 4));
        assert_eq!(x2.coeff(GRID), rat_int(2));
        assert_eq!(xi(3, N).coeff(12), rat_int(2));
        assert_eq!(xi(4, N).coeff(12), rat_int(-2));
    }

    #[test]
    fn serre_derivative_of_e4_at_weight_4() {
        // ∂_4 E4 = E4' - (1/3) E2 E4 = -E6/3
        let d = serre_derivative(&e4(N), &rat_int(4));
        assert_eq!(d, e6(N).scale(&rat(-1, 3)).truncate(d.trunc()));
    }
}
