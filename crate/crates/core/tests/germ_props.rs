use centerfocus_core::germ::{finite_order, pseudo_orbit, Germ1, OrbitOutcome, PERIOD_TOLERANCE};
use centerfocus_core::series::Coefficient;
use num_complex::Complex64;
use proptest::prelude::*;

const N: u32 = 10;

fn germ_with(multiplier: Coefficient) -> impl Strategy<Value = Germ1> {
    prop::collection::vec((2u32..=N, -3i64..=3, 1i64..=3), 0..5).prop_map(move |terms| {
        let mut all = vec![(1, multiplier.clone())];
        all.extend(terms.into_iter().map(|(d, a, b)| (d, Coefficient::ratio(a, b))));
        Germ1::new(N, all).unwrap()
    })
}

fn germ() -> impl Strategy<Value = Germ1> {
    (1i64..=3, 1i64..=2)
        .prop_flat_map(|(a, b)| germ_with(Coefficient::ratio(a, b)))
}

fn tangent_to_identity() -> impl Strategy<Value = Germ1> {
    germ_with(Coefficient::from_int(1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn composition_is_associative(f in germ(), g in germ(), h in germ()) {
        prop_assert_eq!(f.compose(&g).compose(&h), f.compose(&g.compose(&h)));
    }

    #[test]
    fn inverse_is_two_sided(f in germ()) {
        let g = f.invert();
        prop_assert!(f.compose(&g).is_identity());
        prop_assert!(g.compose(&f).is_identity());
    }

    #[test]
    fn finite_order_is_conjugation_invariant(g in tangent_to_identity(), k in 0usize..4) {
        let lambdas = [
            Coefficient::from_int(1),
            Coefficient::from_int(-1),
            Coefficient::i(),
            -Coefficient::i(),
        ];
        let f = Germ1::linear(lambdas[k].clone(), N);
        let conj = f.conjugate_by(&g);
        prop_assert_eq!(finite_order(&conj, 8).unwrap(), finite_order(&f, 8).unwrap());
    }

    #[test]
    fn finite_order_bounds_pseudo_orbit_periods(g in tangent_to_identity(), r in 0.005f64..0.05, th in 0.0f64..6.28) {
        let rot = Germ1::linear(Coefficient::i(), 16);
        let g16 = Germ1::new(16, g.terms().map(|(d, c)| (d, c.clone()))).unwrap();
        let f = rot.conjugate_by(&g16);
        let k = finite_order(&f, 8).unwrap().unwrap();
        let orbit = pseudo_orbit(&f, Complex64::from_polar(r, th), 20, 1.0);
        if let OrbitOutcome::Periodic { period } = orbit.outcome {
            prop_assert_eq!(k % period, 0);
        }
    }

    #[test]
    fn parabolic_germs_have_no_periodic_points(a in 1i64..=3, r in 0.001f64..0.05, th in 0.0f64..6.28) {
        let f = Germ1::new(12, [(1, Coefficient::from_int(1)), (2, Coefficient::from_int(a))]).unwrap();
        let orbit = pseudo_orbit(&f, Complex64::from_polar(r, th), 200, 1.0);
        let periodic = matches!(orbit.outcome, OrbitOutcome::Periodic { .. });
        prop_assert!(!periodic);
    }
}

#[test]
fn spec_examples() {
    let zz = Germ1::new(4, [(1, Coefficient::from_int(1)), (2, Coefficient::from_int(1))]).unwrap();
    let expected = Germ1::new(
        4,
        [(1, 1), (2, 2), (3, 2), (4, 1)].map(|(d, c)| (d, Coefficient::from_int(c))),
    )
    .unwrap();
    assert_eq!(zz.compose(&zz), expected);
    let inv = Germ1::new(
        4,
        [(1, 1), (2, -1), (3, 2), (4, -5)].map(|(d, c)| (d, Coefficient::from_int(c))),
    )
    .unwrap();
    assert_eq!(zz.invert(), inv);

    let iz = Germ1::linear(Coefficient::i(), 16);
    assert_eq!(finite_order(&iz, 8), Ok(Some(4)));
    let g = Germ1::new(16, [(1, Coefficient::from_int(1)), (2, Coefficient::from_int(1))]).unwrap();
    assert_eq!(finite_order(&iz.conjugate_by(&g), 8), Ok(Some(4)));
    assert_eq!(finite_order(&zz.truncate(4), 50), Ok(None));

    let minus = Germ1::linear(Coefficient::from_int(-1), 8);
    assert_eq!(pseudo_orbit(&minus, Complex64::new(0.1, 0.0), 10, 1.0).period(), Some(2));
    let zz12 = Germ1::new(12, [(1, Coefficient::from_int(1)), (2, Coefficient::from_int(1))]).unwrap();
    let o = pseudo_orbit(&zz12, Complex64::new(0.05, 0.0), 100, 1.0);
    assert!(o.period().is_none());
    assert!(PERIOD_TOLERANCE <= 1e-9);
}

/// iz + z⁵: (iz + z⁵)^4 has a nonzero z⁵ term (4z⁵), so it is not of finite
/// order. At |z| = 0.1 the drift per four iterations is about 4e-5, far above
/// the period tolerance, so the pseudo-orbit does not close up either.
#[test]
fn rotation_plus_quintic_is_consistent_across_layers() {
    let f = Germ1::new(12, [(1, Coefficient::i()), (5, Coefficient::from_int(1))]).unwrap();
    assert_eq!(finite_order(&f, 8), Ok(None));
    assert_ne!(f.iterate(4).coeff(5), Coefficient::from_int(0));
    let o = pseudo_orbit(&f, Complex64::new(0.1, 0.0), 40, 1.0);
    assert!(o.period().is_none(), "{:?}", o.outcome);
}
