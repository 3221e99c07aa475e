//! Verification reports: a uniform pass/fail record for every identity the
//! engine checks, plus the named suites the command-line front end exposes.

use serde::Serialize;

/// One verified identity: a name, the truncation order it was checked at
/// (in 24ths of a power of q), whether the residual was exactly zero, and a
/// short human-readable detail line.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub order24: i64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, order24: i64, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), order24, passed, detail: detail.into() }
    }
}

/// A named group of checks.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

use crate::qseries::{self, rat, rat_int, PuiseuxSeries, GRID};
use crate::weyl::{orbit_sum, GroupAlgebraElement, Weight};
use crate::{frobenius, jacobi, modforms};

fn series_check(name: impl Into<String>, residual: &PuiseuxSeries) -> Check {
    let passed = residual.is_zero();
    let detail = if passed {
        "residual vanishes identically".to_string()
    } else {
        format!("nonzero residual, leading exponent {}/24", residual.val())
    };
    Check::new(name, residual.trunc(), passed, detail)
}

fn mat2_check(name: impl Into<String>, residual: &modforms::Mat2) -> Check {
    let passed = modforms::mat2_is_zero(residual);
    let trunc = residual.iter().flatten().map(|s| s.trunc()).min().unwrap();
    let detail = if passed {
        "all four residual entries vanish".to_string()
    } else {
        "nonzero residual entry".to_string()
    };
    Check::new(name, trunc, passed, detail)
}

/// Hypergeometric-equation suite: the second-order modular equation, the
/// lattice characters as its weight-2 solutions, the solution-space duality
/// pairings, and the Wronskian evaluation.
pub fn suite_kz(trunc: i64) -> VerificationReport {
    let mut checks = Vec::new();
    for label in [0u8, 1, 3, 4] {
        let f = frobenius::eta4_char_q(label, trunc);
        let r = modforms::kz_residual(&f, &rat_int(2));
        checks.push(series_check(
            format!("weight-2 modular equation solved by eta^4 * character {} restriction", label),
            &r,
        ));
    }
    for num in 1..=7i64 {
        let k = rat(num, 2);
        let sols = modforms::kz_solve(&k, trunc);
        for (i, f) in sols.iter().enumerate() {
            checks.push(series_check(
                format!("modular equation residual for solution {} at k={}/2", i, num),
                &modforms::kz_residual(f, &k),
            ));
        }
        checks.push(mat2_check(
            format!("duality pairing constant and diagonal at k={}/2", num),
            &modforms::duality_residual(&k, trunc),
        ));
        checks.push(series_check(
            format!("wronskian is alpha * eta^(24 alpha) at k={}/2", num),
            &modforms::kz_wronskian_residual(&k, trunc),
        ));
    }
    VerificationReport { suite: "kz".into(), checks }
}

/// The quadratic first-order system for the theta-constant logarithmic
/// derivatives.
pub fn suite_halphen(trunc: i64) -> VerificationReport {
    let rs = modforms::halphen_residuals(trunc);
    let checks = rs
        .iter()
        .enumerate()
        .map(|(i, r)| series_check(format!("halphen equation {}", i + 1), r))
        .collect();
    VerificationReport { suite: "halphen".into(), checks }
}

/// Brute-force lattice count: number of integer vectors x in Z^4 with
/// x.x = n and coordinate sum of the required parity, summed into
/// sum_x q^{x.x/2}. This is an oracle independent of the theta machinery.
fn lattice_theta_oracle(odd_sum: bool, trunc: i64) -> PuiseuxSeries {
    let mut r = PuiseuxSeries::zero(trunc);
    let bound = {
        let mut b = 0i64;
        while 12 * b * b < trunc {
            b += 1;
        }
        b
    };
    for x0 in -bound..=bound {
        for x1 in -bound..=bound {
            for x2 in -bound..=bound {
                for x3 in -bound..=bound {
                    let n = x0 * x0 + x1 * x1 + x2 * x2 + x3 * x3;
                    let e24 = 12 * n; // exponent n/2 in q
                    if e24 >= trunc {
                        continue;
                    }
                    if ((x0 + x1 + x2 + x3) & 1 != 0) == odd_sum {
                        r.insert_term(e24, rat_int(1));
                    }
                }
            }
        }
    }
    r
}

/// Character identities: q-restrictions against the brute-force lattice
/// oracle and the quoted leading terms, triality of the q-restrictions,
/// the heat operator annihilating every character, and the theta-quotient /
/// Eisenstein identities.
pub fn suite_char_identities(trunc: i64) -> VerificationReport {
    let mut checks = Vec::new();
    let pad = trunc + 8;
    let eta4 = qseries::eta_pow(4, pad);
    let x0 = jacobi::character_q(0, pad).mul(&eta4).truncate(trunc);
    let x1 = jacobi::character_q(1, pad).mul(&eta4).truncate(trunc);
    checks.push(series_check(
        "eta^4 * character 0 restriction equals even-sum lattice count",
        &x0.sub(&lattice_theta_oracle(false, trunc)),
    ));
    checks.push(series_check(
        "eta^4 * character 1 restriction equals odd-sum lattice count",
        &x1.sub(&lattice_theta_oracle(true, trunc)),
    ));
    let lead0 = [(0i64, 1i64), (GRID, 24), (2 * GRID, 24), (3 * GRID, 96)];
    let ok0 = lead0.iter().all(|(e, c)| x0.coeff(*e) == rat_int(*c));
    checks.push(Check::new(
        "leading terms 1 + 24q + 24q^2 + 96q^3 of eta^4 * character 0 restriction",
        trunc,
        ok0,
        format!("coefficients at q^0..q^3: {:?}", lead0.map(|(e, _)| x0.coeff(e).to_string())),
    ));
    let ok1 = x1.coeff(GRID / 2) == rat_int(8) && x1.coeff(GRID + GRID / 2) == rat_int(32);
    checks.push(Check::new(
        "leading terms 8q^(1/2) + 32q^(3/2) of eta^4 * character 1 restriction",
        trunc,
        ok1,
        format!(
            "coefficients at q^(1/2), q^(3/2): {}, {}",
            x1.coeff(GRID / 2),
            x1.coeff(GRID + GRID / 2)
        ),
    ));
    for label in [3u8, 4] {
        checks.push(series_check(
            format!("triality: character {} restriction equals character 1 restriction", label),
            &jacobi::character_q(label, trunc).sub(&jacobi::character_q(1, trunc)),
        ));
    }
    for label in [0u8, 1, 3, 4] {
        let d = jacobi::character(label, trunc).op_d();
        let passed = d.is_zero();
        checks.push(Check::new(
            format!("heat operator annihilates character {}", label),
            trunc,
            passed,
            if passed { "image vanishes identically".into() } else { "nonzero image".to_string() },
        ));
    }
    for (name, r) in modforms::char_identity_residuals(trunc) {
        checks.push(series_check(name, &r));
    }
    for (i, r) in modforms::symmetric_xi_residuals(trunc).iter().enumerate() {
        checks.push(series_check(format!("symmetric theta-quotient identity {}", i + 1), r));
    }
    VerificationReport { suite: "char-identities".into(), checks }
}

/// The two 2x2 connection matrices: determinant of the first, the first-order
/// system for the second, and its quadratic congruence.
pub fn suite_a_matrices(trunc: i64) -> VerificationReport {
    let checks = vec![
        series_check("determinant of first connection matrix equals 4", &modforms::a1_det_residual(trunc)),
        mat2_check("first-order system for second connection matrix", &modforms::a2_ode_residual(trunc)),
        mat2_check(
            "quadratic congruence of second connection matrix",
            &modforms::a2_congruence_residual(trunc),
        ),
    ];
    VerificationReport { suite: "a-matrices".into(), checks }
}

/// Expected q^0 coefficient of each generator: a short combination of the
/// orbit sums S(w_i) of the fundamental weights.
pub fn expected_initial_term(i: usize) -> GroupAlgebraElement {
    let s: Vec<GroupAlgebraElement> =
        (1..=4).map(|k| orbit_sum(&Weight::fundamental(k))).collect();
    let (s1, s2, s3, s4) = (&s[0], &s[1], &s[2], &s[3]);
    let sum134 = s1.add(s3).add(s4);
    match i {
        0 => sum134.add(&GroupAlgebraElement::constant(rat_int(48))),
        1 => sum134.add(&GroupAlgebraElement::constant(rat_int(-24))),
        2 => s1.scale(&rat_int(-2)).add(s3).add(s4),
        3 => s3.sub(s4),
        4 => {
            let sq = s1.mul(s1).add(&s3.mul(s3)).add(&s4.mul(s4)).scale(&rat_int(2));
            sq.add(&s1.mul(s3))
                .add(&s1.mul(s4))
                .add(&s3.mul(s4))
                .add(&sum134.scale(&rat_int(24)))
                .sub(&s2.scale(&rat_int(36)))
                .sub(&GroupAlgebraElement::constant(rat_int(288)))
                .scale(&rat(-1, 36))
        }
        _ => panic!("generator index must be 0..=4"),
    }
}

/// The five generators: weight/index gradings, zero q-valuation, and the
/// quoted q^0 coefficients in the orbit-sum basis.
pub fn suite_generators(trunc: i64) -> VerificationReport {
    let mut checks = Vec::new();
    for i in 0..5usize {
        let g = jacobi::generator(i, trunc);
        let grading_ok = g.weight2() == jacobi::GENERATOR_WEIGHT2[i]
            && g.index() == jacobi::GENERATOR_INDEX[i]
            && g.val() == 0;
        checks.push(Check::new(
            format!("generator {}: weight 2k={}, index {}, q-valuation 0", i, jacobi::GENERATOR_WEIGHT2[i], jacobi::GENERATOR_INDEX[i]),
            trunc,
            grading_ok,
            format!("weight2={}, index={}, valuation={}/24", g.weight2(), g.index(), g.val()),
        ));
        let init_ok = g.initial_term() == expected_initial_term(i);
        checks.push(Check::new(
            format!("generator {}: q^0 coefficient matches the quoted orbit-sum combination", i),
            trunc,
            init_ok,
            if init_ok { "exact match".into() } else { "mismatch".to_string() },
        ));
    }
    VerificationReport { suite: "generators".into(), checks }
}

pub fn suite_bracket_table(trunc: i64) -> VerificationReport {
    VerificationReport { suite: "bracket-table".into(), checks: frobenius::bracket_table_checks(trunc) }
}

pub fn suite_j1(trunc: i64) -> VerificationReport {
    VerificationReport { suite: "j1".into(), checks: frobenius::j1_checks(trunc) }
}

pub fn suite_j0(trunc: i64) -> VerificationReport {
    VerificationReport { suite: "j0".into(), checks: frobenius::j0_checks(trunc) }
}

/// Potential suite: the 21 pairings against raised second derivatives of the
/// potential, agreement of the two routes to the degree-2 flat coordinate,
/// and the closed forms of the potential's coefficient functions.
pub fn suite_potential(trunc: i64) -> VerificationReport {
    let mut checks = frobenius::u4_checks(trunc);
    checks.extend(potential_coefficient_checks(trunc));
    checks.extend(frobenius::potential_identity_checks(trunc));
    VerificationReport { suite: "potential".into(), checks }
}

/// The coefficient functions of the potential against their theta-series
/// closed forms and leading terms.
pub fn potential_coefficient_checks(trunc: i64) -> Vec<Check> {
    let (f0, f1, f2) = frobenius::potential_coefficients(trunc);
    let x0 = frobenius::eta4_char_q(0, trunc);
    let x1 = frobenius::eta4_char_q(1, trunc);
    let mut checks = vec![
        series_check(
            "quartic-coupling combination f2 - 3 f1 equals (1/8) eta^4 * character 0 restriction",
            &f2.sub(&f1.scale(&rat_int(3))).sub(&x0.scale(&rat(1, 8))),
        ),
        series_check(
            "odd coupling f0 equals (1/8) eta^4 * character 1 restriction",
            &f0.sub(&x1.scale(&rat(1, 8))),
        ),
    ];
    let lead_ok = f0.val() == GRID / 2
        && f1.val() == 0
        && f1.coeff(0) == rat(-1, 24)
        && f2.val() == GRID
        && f2.coeff(GRID) == rat_int(3);
    checks.push(Check::new(
        "leading terms: f0 = q^(1/2)+..., f1 = -1/24+..., f2 = 3q+...",
        trunc,
        lead_ok,
        format!(
            "f0 leading {}/24, f1(0) = {}, f2 leading {}/24 with coefficient {}",
            f0.val(),
            f1.coeff(0),
            f2.val(),
            f2.coeff(f2.val())
        ),
    ));
    checks
}

pub fn suite_wdvv(trunc: i64) -> VerificationReport {
    VerificationReport { suite: "wdvv".into(), checks: frobenius::wdvv_checks(trunc) }
}

/// Registry of named suites, in the order `verify all` runs them.
pub const SUITE_NAMES: [&str; 10] = [
    "kz",
    "halphen",
    "char-identities",
    "a-matrices",
    "generators",
    "bracket-table",
    "j1",
    "j0",
    "potential",
    "wdvv",
];

/// Run one named suite at the given truncation (in 24ths). Unknown names
/// return None. "all" runs the whole registry, capping the associativity
/// suite at order 3 (its products push the lattice enumeration an order of
/// magnitude past the scalar suites).
pub fn run_suites(name: &str, trunc: i64) -> Option<Vec<VerificationReport>> {
    let one = |n: &str, t: i64| -> VerificationReport {
        match n {
            "kz" => suite_kz(t),
            "halphen" => suite_halphen(t),
            "char-identities" => suite_char_identities(t),
            "a-matrices" => suite_a_matrices(t),
            "generators" => suite_generators(t),
            "bracket-table" => suite_bracket_table(t),
            "j1" => suite_j1(t),
            "j0" => suite_j0(t),
            "potential" => suite_potential(t),
            "wdvv" => suite_wdvv(t),
            _ => unreachable!(),
        }
    };
    if name == "all" {
        return Some(
            SUITE_NAMES
                .iter()
                .map(|n| {
                    let t = if *n == "wdvv" { trunc.min(3 * GRID) } else { trunc };
                    one(n, t)
                })
                .collect(),
        );
    }
    if SUITE_NAMES.contains(&name) {
        Some(vec![one(name, trunc)])
    } else {
        None
    }
}
