use num_bigint::BigInt;
use num_traits::ToPrimitive;
use proptest::prelude::*;

use lipfree::basis_cube;
use lipfree::basis_rd::{expand_rd, reconstruct_rd, v_set, CutoffSequence};
use lipfree::pnorm::{exact_norm_with, NormOptions};
use lipfree::wire::{dyadic_from_json, dyadic_to_json, molecule_from_json, molecule_to_json};
use lipfree::{exact_norm, lambda_weights, Dyadic, GridSpec, GroundSet, Molecule, Point, Rational, SpaceDescriptor};

fn dyadic() -> impl Strategy<Value = Dyadic> {
    (-1000i64..1000, 0i64..12).prop_map(|(n, e)| Dyadic::new(n, e))
}

fn rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, prop::sample::select(vec![1i64, 2, 3, 4, 8]))
        .prop_filter("nonzero", |(a, _)| *a != 0)
        .prop_map(|(a, b)| Rational::new(BigInt::from(a), BigInt::from(b)))
}

/// Molecules with up to `n` terms on the mesh `2^-level` inside `[lo, hi]^d`.
fn molecule(space: SpaceDescriptor, level: u32, lo: i64, hi: i64, n: usize) -> impl Strategy<Value = Molecule> {
    let d = space.dim();
    prop::collection::vec((prop::collection::vec(lo..=hi, d), rational()), 0..=n).prop_map(move |terms| {
        let terms = terms.into_iter().map(|(w, a)| (Point::from_scaled(&w, level), a));
        Molecule::canonicalize(terms, space.clone()).unwrap()
    })
}

/// `<m, f>` for `f(x) = x_1 - 3 x_2`, which vanishes at the base point.
fn linear_pairing(m: &Molecule) -> Rational {
    m.terms()
        .iter()
        .map(|(x, a)| (x.coords()[0].to_rational() - x.coords()[1].to_rational() * Rational::from_integer(3.into())) * a)
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dyadic_arithmetic_matches_rationals(a in dyadic(), b in dyadic()) {
        prop_assert_eq!((&a + &b).to_rational(), a.to_rational() + b.to_rational());
        prop_assert_eq!((&a - &b).to_rational(), a.to_rational() - b.to_rational());
        prop_assert_eq!((&a * &b).to_rational(), a.to_rational() * b.to_rational());
        prop_assert_eq!(a.cmp(&b), a.to_rational().cmp(&b.to_rational()));
        prop_assert_eq!(dyadic_from_json(&dyadic_to_json(&a)).unwrap(), a);
    }

    #[test]
    fn weights_form_a_partition_of_unity(
        w in prop::collection::vec(-64i64..64, 1..=3),
        level in 0i64..3,
    ) {
        let x = Point::from_scaled(&w, 4);
        let grid = GridSpec::dyadic(w.len(), level);
        let weights = lambda_weights(&x, &grid).unwrap();
        prop_assert_eq!(weights.total(), Dyadic::one());
        prop_assert!(weights.len() <= 1 << w.len());
        prop_assert!(weights.iter().all(|(_, a)| a.signum() > 0));
    }

    #[test]
    fn retraction_is_idempotent_and_preserves_linear_pairings(m in molecule(SpaceDescriptor::full(2), 3, -16, 16, 5)) {
        let grid = GridSpec::dyadic(2, 1);
        let r = m.retract(&grid).unwrap();
        prop_assert_eq!(r.retract(&grid).unwrap(), r.clone());
        prop_assert_eq!(linear_pairing(&r), linear_pairing(&m));
    }

    #[test]
    fn cube_basis_round_trips(m in molecule(SpaceDescriptor::unit_cube(2), 3, 0, 8, 6)) {
        let coeffs = basis_cube::expand(&m, 3).unwrap();
        prop_assert_eq!(basis_cube::reconstruct(&coeffs).unwrap(), m);
    }

    #[test]
    fn rd_basis_round_trips(picks in prop::collection::vec((0usize..10_000, rational()), 0..=5)) {
        let k = CutoffSequence::default();
        let pool = v_set(2, 1, &k).unwrap();
        let terms = picks.into_iter().map(|(i, a)| (pool[i % pool.len()].clone(), a));
        let m = Molecule::canonicalize(terms, SpaceDescriptor::full(1)).unwrap();
        let coeffs = expand_rd(&m, 2, &k).unwrap();
        prop_assert_eq!(reconstruct_rd(&coeffs).unwrap(), m);
    }

    #[test]
    fn norm_is_homogeneous_and_p_subadditive(
        a in molecule(SpaceDescriptor::full(1), 1, -6, 6, 3),
        b in molecule(SpaceDescriptor::full(1), 1, -6, 6, 3),
        c in rational(),
        p in prop::sample::select(vec![1.0, 2.0 / 3.0, 0.5]),
    ) {
        let ground = GroundSet::from_support(&a).augmented(b.support().cloned()).unwrap();
        let na = exact_norm(&a, &ground, p).unwrap().value;
        let nb = exact_norm(&b, &ground, p).unwrap().value;
        let nc = exact_norm(&a.scale(&c), &ground, p).unwrap().value;
        prop_assert!((nc - c.to_f64().unwrap().abs() * na).abs() <= 1e-12 * na.max(1.0));
        let nab = exact_norm(&a.add(&b).unwrap(), &ground, p).unwrap().value;
        prop_assert!(nab.powf(p) <= na.powf(p) + nb.powf(p) + 1e-9);
    }

    #[test]
    fn subset_dp_matches_prufer(
        m in molecule(SpaceDescriptor::full(2), 1, -3, 3, 5),
        p in prop::sample::select(vec![1.0, 0.5]),
    ) {
        let ground = GroundSet::from_support(&m);
        let a = exact_norm(&m, &ground, p).unwrap().value;
        let b = exact_norm_with(&m, &ground, p, &NormOptions::dp(12)).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn molecules_survive_json(m in molecule(SpaceDescriptor::full(2), 4, -40, 40, 6)) {
        let back = molecule_from_json(&molecule_to_json(&m)).unwrap();
        prop_assert!(!back.canonicalized);
        prop_assert_eq!(back.molecule, m);
    }
}
