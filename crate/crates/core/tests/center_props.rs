mod common;

use centerfocus_core::center::{
    certify_center, homological_rank, lyapunov_quantities, normalize_rotation, Verdict,
};
use centerfocus_core::series::{Coefficient, Poly2, VectorField2};
use common::{corpus, field, hamiltonian_field, half};
use proptest::prelude::*;

const N: u32 = 8;

fn coefficient() -> impl Strategy<Value = Coefficient> {
    (-4i64..=4, 1i64..=3).prop_map(|(a, b)| Coefficient::ratio(a, b))
}

/// `(x² + y²)/2` plus random cubic and quartic terms.
fn hamiltonian() -> impl Strategy<Value = Poly2> {
    (
        prop::collection::vec(coefficient(), 4),
        prop::collection::vec(coefficient(), 5),
    )
        .prop_map(|(cubic, quartic)| {
            let mut terms = vec![(2, 0, half()), (0, 2, half())];
            terms.extend(cubic.into_iter().enumerate().map(|(l, c)| (3 - l as u32, l as u32, c)));
            terms.extend(quartic.into_iter().enumerate().map(|(l, c)| (4 - l as u32, l as u32, c)));
            Poly2::from_terms(N + 1, terms)
        })
}

/// A rotation with random quadratic and cubic terms.
fn rotation_field() -> impl Strategy<Value = VectorField2> {
    (
        prop::collection::vec(coefficient(), 7),
        prop::collection::vec(coefficient(), 7),
    )
        .prop_map(|(p, q)| {
            let hot = |v: Vec<Coefficient>| {
                let exps = [(2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)];
                exps.into_iter().zip(v).map(|((i, j), c)| (i, j, c)).collect::<Vec<_>>()
            };
            let mut pt = hot(p);
            pt.push((0, 1, Coefficient::from_int(-1)));
            let mut qt = hot(q);
            qt.push((1, 0, Coefficient::from_int(1)));
            VectorField2::new(Poly2::from_terms(N, pt), Poly2::from_terms(N, qt))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hamiltonian_fields_have_no_obstructions(h in hamiltonian()) {
        let x = hamiltonian_field(&h);
        let norm = normalize_rotation(&x).unwrap();
        prop_assert_eq!(&norm.normalized, &x);
        let report = lyapunov_quantities(&norm, N).unwrap();
        prop_assert!(report.obstructions.iter().all(|o| o.value == Coefficient::from_int(0)));
        prop_assert_eq!(report.first_nonzero, None);
        let xf = x.lie_derivative(&report.first_integral).truncate(report.truncation_degree);
        prop_assert!(xf.is_zero());
    }

    #[test]
    fn reports_are_exact(x in rotation_field()) {
        let norm = normalize_rotation(&x).unwrap();
        let report = lyapunov_quantities(&norm, N).unwrap();
        prop_assert!(report.defect(&norm.normalized).is_zero());
    }

    #[test]
    fn verdict_is_stable_under_positive_scaling(x in rotation_field(), k in 0usize..4) {
        let c = [Coefficient::ratio(1, 2), Coefficient::from_int(2), Coefficient::from_int(3), Coefficient::ratio(5, 3)][k].clone();
        let base = certify_center(&x, N);
        let scaled = certify_center(&x.scale(&c), N);
        match (&base.verdict, &scaled.verdict) {
            (Verdict::Focus { index: a, unstable: ua, eta: ea, .. }, Verdict::Focus { index: b, unstable: ub, eta: eb, .. }) => {
                prop_assert_eq!(a, b);
                prop_assert_eq!(ua, ub);
                // the normalization divides out ω, which scales with c
                prop_assert_eq!(ea, eb);
            }
            (a, b) => prop_assert_eq!(a.label(), b.label()),
        }
    }
}

#[test]
fn odd_degrees_are_uniquely_solvable() {
    for k in 1..=15 {
        let (dim, rank) = homological_rank(k);
        assert_eq!(dim, k as usize + 1);
        if k % 2 == 1 {
            assert_eq!(rank, dim, "degree {k}");
        } else {
            assert_eq!(rank, dim - 1, "degree {k}");
        }
    }
}

#[test]
fn corpus_verdicts() {
    for entry in corpus(12) {
        let cert = certify_center(&entry.field, 12);
        assert_eq!(cert.verdict.is_center(), entry.center, "{}", entry.name);
    }
}

#[test]
fn focus_obstructions_match_the_circle_mean_oracle() {
    // Cubic-only perturbations have F₃ = 0, so η₂ is the circle mean of X(x²+y²).
    // ẋ = −y + x r², ẏ = x + y r²: X(r²) = 2r⁴, mean 2.
    let unstable = field(12, &[(0, 1, -1), (3, 0, 1), (1, 2, 1)], &[(1, 0, 1), (2, 1, 1), (0, 3, 1)]);
    // ẋ = −y − x³, ẏ = x − y³: X(r²) = −2(x⁴ + y⁴), mean −2·(3/8 + 3/8).
    let stable = field(12, &[(0, 1, -1), (3, 0, -1)], &[(1, 0, 1), (0, 3, -1)]);
    for (x, eta) in [(unstable, Coefficient::from_int(2)), (stable, Coefficient::ratio(-3, 2))] {
        match certify_center(&x, 12).verdict {
            Verdict::Focus { index, degree, eta: e, unstable } => {
                assert_eq!((index, degree), (2, 4));
                assert_eq!(e, eta);
                assert_eq!(unstable, eta.real_sign() == Some(1));
            }
            v => panic!("{v:?}"),
        }
    }
}

#[test]
fn linear_change_of_a_center_stays_a_center() {
    // ẋ = −2y, ẏ = x/2 + x²: ω = 1, not in rotation form.
    let p = Poly2::from_int_terms(10, &[(0, 1, -2)]);
    let q = Poly2::from_terms(10, [(1, 0, half()), (2, 0, Coefficient::from_int(1))]);
    let cert = certify_center(&VectorField2::new(p, q), 10);
    assert!(cert.verdict.is_center(), "{:?}", cert.verdict);
}

#[test]
fn saddle_is_not_applicable() {
    let saddle = field(6, &[(0, 1, 1)], &[(1, 0, 1)]);
    assert_eq!(certify_center(&saddle, 6).verdict.label(), "NOT_APPLICABLE");
}
