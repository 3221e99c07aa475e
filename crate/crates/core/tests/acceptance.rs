//! Acceptance gate: the twelve headline verifications, each reported on one
//! PASS/FAIL line. Every comparison is an equality of truncated q-series with
//! exact rational coefficients — the tolerance is zero everywhere.

use d4frob::qseries::{self, rat, rat_int, PuiseuxSeries, GRID};
use d4frob::report::{self, Check};
use d4frob::weyl::{orbit_size, orbit_sum, orbit_to_monomial, monomial_to_group_algebra, Weight};
use d4frob::{frobenius, jacobi};

struct Gate {
    lines: Vec<(String, bool)>,
}

impl Gate {
    fn record(&mut self, n: usize, name: &str, checks: &[&Check]) {
        let passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
        self.lines.push((format!("criterion {:2}: {}", n, name), passed));
    }

    fn record_bool(&mut self, n: usize, name: &str, passed: bool) {
        self.lines.push((format!("criterion {:2}: {}", n, name), passed));
    }
}

fn filter<'a>(checks: &'a [Check], pred: impl Fn(&str) -> bool) -> Vec<&'a Check> {
    checks.iter().filter(|c| pred(&c.name)).collect()
}

#[test]
fn acceptance() {
    let mut gate = Gate { lines: Vec::new() };

    // Scalar suites at order 8; character restrictions certified to order 8 >= 6.
    let chars = report::suite_char_identities(8 * GRID).checks;
    let kz = report::suite_kz(8 * GRID).checks;
    let halphen = report::suite_halphen(8 * GRID).checks;
    let amat = report::suite_a_matrices(8 * GRID).checks;

    gate.record(
        1,
        "character q-restrictions match the lattice oracle and quoted leading terms (order 8)",
        &filter(&chars, |n| {
            n.contains("lattice count") || n.contains("leading terms") || n.contains("triality")
        }),
    );
    gate.record(
        2,
        "the heat operator annihilates all four characters (order 8)",
        &filter(&chars, |n| n.contains("heat operator")),
    );

    let generators = report::suite_generators(2 * GRID).checks;
    gate.record(3, "generator gradings and quoted q^0 coefficients", &generators.iter().collect::<Vec<_>>());

    let brackets = report::suite_bracket_table(4 * GRID).checks;
    gate.record(
        4,
        "all 17 pairing/derivative identities of the generator table (order 4)",
        &brackets.iter().collect::<Vec<_>>(),
    );

    let mut c5 = filter(&kz, |n| n.contains("modular equation"));
    c5.extend(filter(&amat, |_| true));
    gate.record(5, "second-order modular equation, connection-matrix determinant and congruence (order 8)", &c5);

    let mut c6 = filter(&halphen, |_| true);
    c6.extend(filter(&chars, |n| {
        !n.contains("lattice count")
            && !n.contains("leading terms")
            && !n.contains("triality")
            && !n.contains("heat operator")
    }));
    gate.record(6, "Halphen system, theta-quotient and Eisenstein identities (order 8)", &c6);

    gate.record(
        7,
        "solution-space duality pairings and Wronskian at seven half-integer weights (order 8)",
        &filter(&kz, |n| n.contains("duality") || n.contains("wronskian")),
    );

    let u4 = frobenius::u4_checks(4 * GRID);
    gate.record(8, "the two routes to the degree-2 flat coordinate agree (order 4)", &u4.iter().collect::<Vec<_>>());

    let mut c9: Vec<&Check> = Vec::new();
    let j1 = report::suite_j1(4 * GRID).checks;
    let j0 = report::suite_j0(4 * GRID).checks;
    c9.extend(j1.iter());
    c9.extend(j0.iter());
    gate.record(9, "generator-differential pairing table and constant flat pairing matrix", &c9);

    let mut c10 = frobenius::potential_identity_checks(4 * GRID);
    c10.extend(report::potential_coefficient_checks(4 * GRID));
    gate.record(
        10,
        "potential identity for all coordinate pairs and coefficient closed forms (order 4)",
        &c10.iter().collect::<Vec<_>>(),
    );

    let wdvv = report::suite_wdvv(3 * GRID).checks;
    gate.record(11, "unit axiom and associativity of the induced product (order 3)", &wdvv.iter().collect::<Vec<_>>());

    gate.record_bool(12, "exact structural properties (ring axioms, derivations, invariance, round trips)", structural_properties());

    for (name, passed) in &gate.lines {
        println!("{}  {}", if *passed { "PASS" } else { "FAIL" }, name);
    }
    assert!(gate.lines.iter().all(|(_, p)| *p), "acceptance gate failed");
}

/// Deterministic instances of the structural properties (the randomized
/// versions live in the property-test target).
fn structural_properties() -> bool {
    let t = 4 * GRID;
    let a = qseries::e4(t);
    let b = qseries::eta_pow(8, t);
    let c = qseries::e6(t).add(&PuiseuxSeries::monomial(-3, rat(5, 7), t));

    // commutative ring axioms on concrete series
    let ring = a.mul(&b).sub(&b.mul(&a)).is_zero()
        && a.mul(&b.mul(&c)).sub(&a.mul(&b).mul(&c)).is_zero()
        && a.add(&b).mul(&c).sub(&a.mul(&c).add(&b.mul(&c))).is_zero()
        && a.mul(&a.inv()).sub(&PuiseuxSeries::one(t)).is_zero();

    // derivation laws: product rule for q d/dq and the weighted Leibniz rule
    // for the weight-raising derivative
    let deriv = a.mul(&b).q_derive().sub(&a.q_derive().mul(&b).add(&a.mul(&b.q_derive()))).is_zero()
        && {
            let e4 = qseries::e4(t);
            let e6 = qseries::e6(t);
            let lhs = qseries::serre_derivative(&e4.mul(&e6), &rat_int(10));
            let rhs = qseries::serre_derivative(&e4, &rat_int(4))
                .mul(&e6)
                .add(&e4.mul(&qseries::serre_derivative(&e6, &rat_int(6))));
            lhs.sub(&rhs).is_zero()
        };

    // invariance of every generator coefficient under the finite reflection group
    let invariant = (0..5).all(|i| {
        let g = jacobi::generator(i, 2 * GRID);
        (0..2 * GRID).all(|e| g.coefficient(e).is_weyl_invariant())
    });

    // orbit-basis round trips and orbit sizes of the fundamental weights
    let round_trip = (1..=4).all(|k| {
        let x = orbit_sum(&Weight::fundamental(k)).add(&orbit_sum(&Weight::fundamental(1)).scale(&rat(3, 2)));
        match orbit_to_monomial(&x) {
            Some(p) => monomial_to_group_algebra(&p) == x,
            None => false,
        }
    });
    let sizes = [8usize, 24, 8, 8]
        .iter()
        .enumerate()
        .all(|(k, s)| orbit_size(&Weight::fundamental(k + 1)) == *s);

    ring && deriv && invariant && round_trip && sizes
}
