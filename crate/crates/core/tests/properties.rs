//! Randomized structural properties: exact ring and derivation laws for the
//! series arithmetic, and reflection-group facts for the weight lattice.

use d4frob::qseries::{rat, PuiseuxSeries};
use d4frob::weyl::{
    apply, monomial_to_group_algebra, orbit, orbit_size, orbit_sum, orbit_to_monomial,
    weyl_group, GroupAlgebraElement, Weight,
};
use proptest::prelude::*;

const T: i64 = 48;

fn arb_series() -> impl Strategy<Value = PuiseuxSeries> {
    proptest::collection::vec(((-12i64..T), (-9i64..9), (1i64..6)), 0..8).prop_map(|terms| {
        let mut s = PuiseuxSeries::zero(T);
        for (e, n, d) in terms {
            s.insert_term(e, rat(n, d));
        }
        s
    })
}

/// All-even or all-odd doubled coordinates in a small box.
fn arb_weight() -> impl Strategy<Value = Weight> {
    (any::<bool>(), proptest::array::uniform4(-3i64..=3)).prop_map(|(spinor, c)| {
        let off = if spinor { 1 } else { 0 };
        Weight([2 * c[0] + off, 2 * c[1] + off, 2 * c[2] + off, 2 * c[3] + off])
    })
}

/// Compare series as equal up to the largest jointly sound truncation.
fn eq_to_common(a: &PuiseuxSeries, b: &PuiseuxSeries) -> bool {
    let t = a.trunc().min(b.trunc());
    a.truncate(t).sub(&b.truncate(t)).is_zero()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn series_ring_axioms(a in arb_series(), b in arb_series(), c in arb_series()) {
        prop_assert!(eq_to_common(&a.add(&b), &b.add(&a)));
        prop_assert!(eq_to_common(&a.add(&b).add(&c), &a.add(&b.add(&c))));
        prop_assert!(eq_to_common(&a.mul(&b), &b.mul(&a)));
        prop_assert!(eq_to_common(&a.mul(&b).mul(&c), &a.mul(&b.mul(&c))));
        prop_assert!(eq_to_common(&a.add(&b).mul(&c), &a.mul(&c).add(&b.mul(&c))));
        prop_assert!(eq_to_common(&a.sub(&a), &PuiseuxSeries::zero(T)));
        prop_assert!(eq_to_common(&a.mul(&PuiseuxSeries::one(T)), &a));
    }

    #[test]
    fn derivation_laws(a in arb_series(), b in arb_series()) {
        // q d/dq is linear and satisfies the product rule
        prop_assert!(eq_to_common(
            &a.add(&b).q_derive(),
            &a.q_derive().add(&b.q_derive())
        ));
        prop_assert!(eq_to_common(
            &a.mul(&b).q_derive(),
            &a.q_derive().mul(&b).add(&a.mul(&b.q_derive()))
        ));
    }

    #[test]
    fn division_inverts_multiplication(a in arb_series(), b in arb_series()) {
        prop_assume!(!b.is_zero());
        let q = a.mul(&b).div(&b);
        prop_assert!(eq_to_common(&q, &a));
    }

    #[test]
    fn orbits_and_dominant_representatives(w in arb_weight()) {
        let d = w.dominant_rep();
        prop_assert!(d.is_dominant());
        prop_assert!(orbit(&w).contains(&d));
        // the orbit size is the group order divided by the stabilizer order
        prop_assert_eq!(192 % orbit_size(&w), 0);
        // orbit sums are invariant under every group element
        let s = orbit_sum(&w);
        prop_assert!(s.is_weyl_invariant());
        for g in weyl_group().iter().take(8) {
            prop_assert!(orbit(&apply(g, &w)).contains(&d));
        }
    }

    #[test]
    fn orbit_basis_round_trip(ws in proptest::collection::vec((arb_weight(), -6i64..6, 1i64..4), 1..4)) {
        let mut x = GroupAlgebraElement::zero();
        for (w, n, d) in &ws {
            x = x.add(&orbit_sum(w).scale(&rat(*n, *d)));
        }
        let p = orbit_to_monomial(&x);
        prop_assert!(p.is_some());
        prop_assert_eq!(monomial_to_group_algebra(&p.unwrap()), x);
    }
}

#[test]
fn fundamental_orbit_sizes() {
    assert_eq!(
        (1..=4).map(|k| orbit_size(&Weight::fundamental(k))).collect::<Vec<_>>(),
        vec![8, 24, 8, 8]
    );
}
