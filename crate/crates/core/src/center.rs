//! Center/focus decision by the degree-by-degree first-integral construction.
//!
//! After [`normalize_rotation`] the field reads `(−y + p₂)∂x + (x + q₂)∂y`.
//! [`lyapunov_quantities`] then builds `F = x² + y² + Σ_{k≥3} F_k` so that
//! `X(F) = Σ_j η_j (x² + y²)^j` exactly to the truncation degree. On odd
//! degrees the rotation operator `L = −y∂x + x∂y` is invertible; on degree
//! `2j` its cokernel is spanned by `(x² + y²)^j` and `η_j` is the mean of the
//! residual over the unit circle. All `η_j = 0` means a formal center to that
//! order; the first nonzero one decides a focus and its stability.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::series::{linalg, radius_power, Coefficient, Matrix2, Poly2, VectorField2};

/// Default truncation degree for certificates.
pub const DEFAULT_ORDER: u32 = 10;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CenterError {
    #[error("field has complex coefficients; a real field is required")]
    NotReal,
    #[error("field does not vanish at the origin")]
    NotSingular,
    #[error("linear part does not generate a rotation (trace {trace}, determinant {det})")]
    NotARotation { trace: Coefficient, det: Coefficient },
    #[error("rotation frequency sqrt({det}) is irrational; exact normalization needs a rational frequency")]
    IrrationalFrequency { det: Coefficient },
    #[error("truncation degree {requested} is below the minimum {minimum}")]
    TruncationTooLow { requested: u32, minimum: u32 },
    #[error("first integral is not a definite Morse function at the origin")]
    NotMorse,
    #[error("homological equation unsolvable at degree {degree}")]
    HomologicalSolveFailed { degree: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RotationNormalization {
    pub original: VectorField2,
    /// `(x, y) = M·(u, v)`.
    pub change_matrix: Matrix2,
    /// New time is `ω·t`, recorded as the factor `1/ω` applied to the field.
    pub time_rescale: Coefficient,
    pub normalized: VectorField2,
}

fn det2(m: &Matrix2) -> Coefficient {
    &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0])
}

fn inverse2(m: &Matrix2) -> Option<Matrix2> {
    let inv_det = det2(m).inv()?;
    Some([
        [&m[1][1] * &inv_det, -(&m[0][1] * &inv_det)],
        [-(&m[1][0] * &inv_det), &m[0][0] * &inv_det],
    ])
}

fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let (n, d) = (q.numer(), q.denom());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    (&sn * &sn == *n && &sd * &sd == *d).then(|| BigRational::new(sn, sd))
}

/// Conjugates the linear part to the standard rotation `−y∂x + x∂y` and
/// rescales time by `1/ω`.
///
/// For `DX(0) = A` with `tr A = 0` and `det A = ω² > 0`, the change matrix is
/// `M = [e₁, A e₁ / ω]`, which gives `M⁻¹AM = ω·J`.
pub fn normalize_rotation(field: &VectorField2) -> Result<RotationNormalization, CenterError> {
    if !field.is_real() {
        return Err(CenterError::NotReal);
    }
    if !field.singular_at_origin() {
        return Err(CenterError::NotSingular);
    }
    let a = field.linear_part();
    let trace = &a[0][0] + &a[1][1];
    let det = det2(&a);
    let det_positive = det.real_sign() == Some(1);
    if !trace.is_zero() || !det_positive {
        return Err(CenterError::NotARotation { trace, det });
    }
    let omega = rational_sqrt(det.re())
        .map(Coefficient::real)
        .ok_or_else(|| CenterError::IrrationalFrequency { det: det.clone() })?;
    let inv_omega = omega.inv().expect("positive frequency");
    let change: Matrix2 = [
        [Coefficient::one(), &a[0][0] * &inv_omega],
        [Coefficient::zero(), &a[1][0] * &inv_omega],
    ];
    let m_inv = inverse2(&change).expect("c ≠ 0 when det > 0 and trace = 0");
    let p = field.p().linear_change(&change).expect("invertible");
    let q = field.q().linear_change(&change).expect("invertible");
    let row = |r: usize| {
        p.scale(&m_inv[r][0])
            .add(&q.scale(&m_inv[r][1]))
            .scale(&inv_omega)
    };
    let normalized = VectorField2::new(row(0), row(1));
    debug_assert_eq!(normalized.linear_part(), standard_rotation_matrix());
    Ok(RotationNormalization {
        original: field.clone(),
        change_matrix: change,
        time_rescale: inv_omega,
        normalized,
    })
}

fn standard_rotation_matrix() -> Matrix2 {
    [
        [Coefficient::zero(), Coefficient::from_int(-1)],
        [Coefficient::one(), Coefficient::zero()],
    ]
}

/// `−y∂x + x∂y` at the given truncation.
pub fn standard_rotation(truncation: u32) -> VectorField2 {
    VectorField2::new(
        Poly2::from_int_terms(truncation, &[(0, 1, -1)]),
        Poly2::from_int_terms(truncation, &[(1, 0, 1)]),
    )
}

/// One Lyapunov obstruction: the coefficient of `(x² + y²)^j` in `X(F)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Obstruction {
    pub index: u32,
    pub value: Coefficient,
}

impl Obstruction {
    pub fn degree(&self) -> u32 {
        2 * self.index
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LyapunovReport {
    pub truncation_degree: u32,
    pub first_integral: Poly2,
    /// One entry per `j ≥ 2` with `2j ≤ N`.
    pub obstructions: Vec<Obstruction>,
    /// Index `j` of the first nonzero obstruction.
    pub first_nonzero: Option<u32>,
}

impl LyapunovReport {
    pub fn first_nonzero_obstruction(&self) -> Option<&Obstruction> {
        let j = self.first_nonzero?;
        self.obstructions.iter().find(|o| o.index == j)
    }

    /// `Σ_j η_j (x² + y²)^j` at the report's truncation.
    pub fn obstruction_series(&self) -> Poly2 {
        self.obstructions
            .iter()
            .fold(Poly2::zero(self.truncation_degree), |acc, o| {
                acc.add(&radius_power(o.index, self.truncation_degree).scale(&o.value))
            })
    }

    /// `X(F) − Σ η_j (x² + y²)^j`, which must vanish to truncation.
    pub fn defect(&self, normalized: &VectorField2) -> Poly2 {
        normalized
            .lie_derivative(&self.first_integral)
            .truncate(self.truncation_degree)
            .sub(&self.obstruction_series())
    }
}

/// Dense matrix of `L = −y∂x + x∂y` on homogeneous polynomials of degree `k`
/// in the basis `x^{k−l} y^l`, `l = 0..=k`.
pub fn rotation_operator_matrix(k: u32) -> Vec<Vec<Coefficient>> {
    let dim = k as usize + 1;
    let mut m = vec![vec![Coefficient::zero(); dim]; dim];
    for l in 0..dim {
        let i = k as i64 - l as i64;
        let j = l as i64;
        // L(x^i y^j) = −i x^{i−1} y^{j+1} + j x^{i+1} y^{j−1}
        if i > 0 {
            m[l + 1][l] = Coefficient::from_int(-i);
        }
        if j > 0 {
            m[l - 1][l] = Coefficient::from_int(j);
        }
    }
    m
}

/// `(dimension, rank)` of the rotation operator on degree `k`.
pub fn homological_rank(k: u32) -> (usize, usize) {
    let m = rotation_operator_matrix(k);
    (m.len(), linalg::rank(&m))
}

fn double_factorial(n: i64) -> BigInt {
    let mut acc = BigInt::one();
    let mut k = n;
    while k > 1 {
        acc *= k;
        k -= 2;
    }
    acc
}

/// Exact average of `x^a y^b` over the unit circle.
fn circle_mean_monomial(a: u32, b: u32) -> BigRational {
    if a % 2 == 1 || b % 2 == 1 {
        return BigRational::zero();
    }
    BigRational::new(
        double_factorial(a as i64 - 1) * double_factorial(b as i64 - 1),
        double_factorial((a + b) as i64),
    )
}

/// Exact average of a polynomial over the unit circle.
pub fn circle_mean(f: &Poly2) -> Coefficient {
    f.terms().fold(Coefficient::zero(), |acc, (&(a, b), c)| {
        &acc + &(c * &Coefficient::real(circle_mean_monomial(a, b)))
    })
}

fn homogeneous_vector(f: &Poly2, k: u32) -> Vec<Coefficient> {
    (0..=k).map(|l| f.coeff(k - l, l)).collect()
}

/// Solves `L(F_k) = residual-correction` on each degree and collects the
/// obstructions. Works at `min(N, T + 1)` where `T` is the field's
/// truncation, the highest degree `X(F)` is determined at.
pub fn lyapunov_quantities(
    norm: &RotationNormalization,
    order: u32,
) -> Result<LyapunovReport, CenterError> {
    if order < 4 {
        return Err(CenterError::TruncationTooLow {
            requested: order,
            minimum: 4,
        });
    }
    let field = &norm.normalized;
    let n = order.min(field.truncation() + 1);
    let mut f = radius_power(1, n);
    let mut obstructions = Vec::new();
    for k in 3..=n {
        // F_k is still zero, so the degree-k part of X(F) is the residual.
        let residual = field.lie_derivative(&f).homogeneous_part(k);
        let target = homogeneous_vector(&residual, k);
        let matrix = rotation_operator_matrix(k);
        let (rhs, eta, kernel) = if k % 2 == 0 {
            let j = k / 2;
            let eta = circle_mean(&residual);
            let w = homogeneous_vector(&radius_power(j, k), k);
            let rhs = w
                .iter()
                .zip(&target)
                .map(|(wi, ti)| &(&eta * wi) - ti)
                .collect::<Vec<_>>();
            (rhs, Some(eta), Some(w))
        } else {
            (target.iter().map(|t| -t).collect(), None, None)
        };
        let mut g = linalg::solve(&matrix, &rhs)
            .ok_or(CenterError::HomologicalSolveFailed { degree: k })?;
        if let Some(w) = &kernel {
            // No component along (x² + y²)^j in the monomial inner product.
            let dot = |u: &[Coefficient], v: &[Coefficient]| {
                u.iter()
                    .zip(v)
                    .fold(Coefficient::zero(), |acc, (a, b)| &acc + &(a * b))
            };
            let c = &dot(&g, w) / &dot(w, w);
            for (gi, wi) in g.iter_mut().zip(w) {
                *gi -= &(&c * wi);
            }
        }
        let fk = Poly2::from_terms(
            n,
            g.into_iter()
                .enumerate()
                .map(|(l, c)| (k - l as u32, l as u32, c)),
        );
        f = f.add(&fk);
        if let Some(eta) = eta {
            obstructions.push(Obstruction {
                index: k / 2,
                value: eta,
            });
        }
    }
    let first_nonzero = obstructions
        .iter()
        .find(|o| !o.value.is_zero())
        .map(|o| o.index);
    Ok(LyapunovReport {
        truncation_degree: n,
        first_integral: f,
        obstructions,
        first_nonzero,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorseReport {
    /// No constant or linear terms.
    pub critical: bool,
    /// Hessian of the quadratic part is invertible.
    pub nondegenerate: bool,
    /// `Some(true)` for a definite real quadratic part; `None` when the
    /// coefficients are complex.
    pub definite: Option<bool>,
    /// `det` of the Hessian `[[2a, b], [b, 2c]]` of `ax² + bxy + cy²`.
    pub hessian_det: Coefficient,
}

impl MorseReport {
    pub fn center_compatible(&self) -> bool {
        self.critical && self.nondegenerate && self.definite == Some(true)
    }
}

pub fn morse_check(f: &Poly2) -> MorseReport {
    let critical = f.constant_term().is_zero()
        && f.coeff(1, 0).is_zero()
        && f.coeff(0, 1).is_zero();
    let a = f.coeff(2, 0);
    let b = f.coeff(1, 1);
    let c = f.coeff(0, 2);
    let det = &(&Coefficient::from_int(4) * &(&a * &c)) - &(&b * &b);
    let nondegenerate = !det.is_zero();
    let definite = f.is_real().then(|| det.real_sign() == Some(1));
    MorseReport {
        critical,
        nondegenerate,
        definite,
        hessian_det: det,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Every obstruction up to `order` vanishes.
    CenterToOrder { order: u32 },
    /// First nonzero obstruction `η_j` at degree `2j`; `η_j > 0` repels.
    Focus {
        index: u32,
        degree: u32,
        eta: Coefficient,
        unstable: bool,
    },
    NotApplicable { reason: CenterError },
}

impl Verdict {
    pub fn is_center(&self) -> bool {
        matches!(self, Verdict::CenterToOrder { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::CenterToOrder { .. } => "CENTER_TO_ORDER_N",
            Verdict::Focus { .. } => "FOCUS",
            Verdict::NotApplicable { .. } => "NOT_APPLICABLE",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CenterCertificate {
    pub verdict: Verdict,
    pub normalization: Option<RotationNormalization>,
    pub report: Option<LyapunovReport>,
    pub morse: Option<MorseReport>,
}

/// Normalization, obstructions and Morse check in one pass.
///
/// A failed standing hypothesis (not a rotation, not singular, ...) is not an
/// error here but a [`Verdict::NotApplicable`] carrying the reason.
pub fn certify_center(field: &VectorField2, order: u32) -> CenterCertificate {
    let not_applicable = |reason| CenterCertificate {
        verdict: Verdict::NotApplicable { reason },
        normalization: None,
        report: None,
        morse: None,
    };
    let norm = match normalize_rotation(field) {
        Ok(n) => n,
        Err(e) => return not_applicable(e),
    };
    let report = match lyapunov_quantities(&norm, order) {
        Ok(r) => r,
        Err(e) => return not_applicable(e),
    };
    let morse = morse_check(&report.first_integral);
    let verdict = match report.first_nonzero_obstruction() {
        Some(o) => Verdict::Focus {
            index: o.index,
            degree: o.degree(),
            eta: o.value.clone(),
            unstable: o.value.real_sign() == Some(1),
        },
        None if morse.center_compatible() => Verdict::CenterToOrder {
            order: report.truncation_degree,
        },
        None => Verdict::NotApplicable {
            reason: CenterError::NotMorse,
        },
    };
    CenterCertificate {
        verdict,
        normalization: Some(norm),
        report: Some(report),
        morse: Some(morse),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(n: u32, p: &[(u32, u32, i64)], q: &[(u32, u32, i64)]) -> VectorField2 {
        VectorField2::new(Poly2::from_int_terms(n, p), Poly2::from_int_terms(n, q))
    }

    fn identity() -> Matrix2 {
        [
            [Coefficient::one(), Coefficient::zero()],
            [Coefficient::zero(), Coefficient::one()],
        ]
    }

    #[test]
    fn normalization_examples() {
        let rot = standard_rotation(10);
        let norm = normalize_rotation(&rot).unwrap();
        assert_eq!(norm.change_matrix, identity());
        assert_eq!(norm.time_rescale, Coefficient::one());
        assert_eq!(norm.normalized, rot);

        let fast = field(10, &[(0, 1, -2)], &[(1, 0, 2)]);
        let norm = normalize_rotation(&fast).unwrap();
        assert_eq!(norm.time_rescale, Coefficient::ratio(1, 2));
        assert_eq!(norm.change_matrix, identity());
        assert_eq!(norm.normalized, rot);

        let saddle = field(10, &[(0, 1, 1)], &[(1, 0, 1)]);
        assert!(matches!(
            normalize_rotation(&saddle),
            Err(CenterError::NotARotation { .. })
        ));
    }

    #[test]
    fn normalization_of_skewed_rotation() {
        // ẋ = x − 2y, ẏ = x − y: trace 0, det 1.
        let f = field(6, &[(1, 0, 1), (0, 1, -2), (2, 0, 1)], &[(1, 0, 1), (0, 1, -1)]);
        let norm = normalize_rotation(&f).unwrap();
        assert_eq!(norm.normalized.linear_part(), standard_rotation_matrix());
    }

    #[test]
    fn irrational_frequency_rejected() {
        let f = field(6, &[(0, 1, -2)], &[(1, 0, 1)]);
        assert!(matches!(
            normalize_rotation(&f),
            Err(CenterError::IrrationalFrequency { .. })
        ));
    }

    #[test]
    fn linear_center_has_no_obstructions() {
        let norm = normalize_rotation(&standard_rotation(10)).unwrap();
        let report = lyapunov_quantities(&norm, 10).unwrap();
        assert_eq!(report.first_nonzero, None);
        assert_eq!(report.obstructions.len(), 4);
        assert_eq!(report.first_integral, radius_power(1, 10));
    }

    #[test]
    fn cubic_focus_first_obstruction() {
        let f = field(8, &[(0, 1, -1), (3, 0, 1), (1, 2, 1)], &[(1, 0, 1), (2, 1, 1), (0, 3, 1)]);
        let norm = normalize_rotation(&f).unwrap();
        let report = lyapunov_quantities(&norm, 8).unwrap();
        assert_eq!(report.first_nonzero, Some(2));
        assert_eq!(report.obstructions[0].value, Coefficient::from_int(2));
        assert!(report.defect(&norm.normalized).is_zero());
    }

    #[test]
    fn hamiltonian_cubic_center() {
        let f = field(12, &[(0, 1, -1)], &[(1, 0, 1), (2, 0, 1)]);
        let norm = normalize_rotation(&f).unwrap();
        let report = lyapunov_quantities(&norm, 12).unwrap();
        assert_eq!(report.first_nonzero, None);
        let expected = Poly2::from_terms(
            12,
            [
                (2, 0, Coefficient::one()),
                (0, 2, Coefficient::one()),
                (3, 0, Coefficient::ratio(2, 3)),
            ],
        );
        assert_eq!(report.first_integral, expected);
    }

    #[test]
    fn odd_degrees_injective_even_degrees_corank_one() {
        for k in 1..=13 {
            let (dim, rank) = homological_rank(k);
            if k % 2 == 1 {
                assert_eq!(rank, dim, "degree {k}");
            } else {
                assert_eq!(rank, dim - 1, "degree {k}");
            }
        }
    }

    #[test]
    fn circle_means() {
        assert_eq!(circle_mean(&radius_power(3, 6)), Coefficient::one());
        assert_eq!(
            circle_mean(&Poly2::from_int_terms(4, &[(4, 0, 1)])),
            Coefficient::ratio(3, 8)
        );
    }

    #[test]
    fn morse_examples() {
        let m = morse_check(&radius_power(1, 4));
        assert!(m.nondegenerate && m.definite == Some(true));
        let cusp = morse_check(&Poly2::from_int_terms(4, &[(2, 0, 1), (0, 3, -1)]));
        assert!(!cusp.nondegenerate);
        let saddle = morse_check(&Poly2::from_int_terms(4, &[(1, 1, 1)]));
        assert!(saddle.nondegenerate && saddle.definite == Some(false));
    }

    #[test]
    fn verdict_examples() {
        let ham = field(12, &[(0, 1, -1)], &[(1, 0, 1), (2, 0, 1)]);
        assert_eq!(certify_center(&ham, 12).verdict, Verdict::CenterToOrder { order: 12 });

        let focus = field(8, &[(0, 1, -1), (3, 0, 1), (1, 2, 1)], &[(1, 0, 1), (2, 1, 1), (0, 3, 1)]);
        match certify_center(&focus, 8).verdict {
            Verdict::Focus { degree, eta, unstable, .. } => {
                assert_eq!(degree, 4);
                assert_eq!(eta, Coefficient::from_int(2));
                assert!(unstable);
            }
            other => panic!("expected focus, got {other:?}"),
        }

        let saddle = field(8, &[(0, 1, 1)], &[(1, 0, 1)]);
        assert_eq!(certify_center(&saddle, 8).verdict.label(), "NOT_APPLICABLE");
    }
}
