//! Quadratic blow-up of a 1-form at the origin, in the two affine charts.
//!
//! Chart `t`: `y = tx`, coordinates `(x, t)`, divisor `E = {x = 0}`.
//! Chart `s`: `x = sy`, coordinates `(s, y)`, divisor `E = {y = 0}`; only the
//! point `s = 0` is not already seen from chart `t`.
//!
//! With `ν` the order of `ω = a dx + b dy` and `a_ν, b_ν` the leading
//! homogeneous parts, the pulled-back form is divisible by `x^ν`. It is
//! divisible by `x^{ν+1}` exactly when `x a_ν + y b_ν ≡ 0` (dicritical case),
//! and then `E` is not invariant.

use num_complex::Complex64;
use num_traits::Zero;

use super::univariate::{self, UPoly};
use super::ComplexError;
use crate::series::{Coefficient, OneForm2, Poly2};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chart {
    T,
    S,
}

impl Chart {
    pub fn name(self) -> &'static str {
        match self {
            Chart::T => "t",
            Chart::S => "s",
        }
    }
}

/// A point of the exceptional divisor singled out by the blow-up.
///
/// For a non-dicritical form these are the singular points of the blown-up
/// foliation; `eigenvalues` is `(transverse, along)`, the eigenvalues of the
/// linearized kernel field in the directions transverse to and along `E`.
/// For a dicritical form they are the tangency points of the foliation with
/// `E` and carry no eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct DivisorPoint {
    pub chart: Chart,
    pub location: Complex64,
    pub exact_location: Option<Coefficient>,
    pub multiplicity: u32,
    pub eigenvalues: Option<(Complex64, Complex64)>,
}

impl DivisorPoint {
    /// `transverse / along`, when both are defined and `along ≠ 0`.
    pub fn eigenvalue_ratio(&self) -> Option<Complex64> {
        let (tr, al) = self.eigenvalues?;
        (al != Complex64::zero()).then(|| tr / al)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlowupResult {
    /// Order `ν` of the form at the origin.
    pub order: u32,
    /// `ã dx + b̃ dt` in `(x, t)`, divided by `x^{divided_power}`.
    pub chart_t: OneForm2,
    /// `ã ds + b̃ dy` in `(s, y)`, divided by `y^{divided_power}`.
    pub chart_s: OneForm2,
    pub divided_power: u32,
    pub divisor_invariant: bool,
    pub singularities_on_e: Vec<DivisorPoint>,
}

impl BlowupResult {
    pub fn is_dicritical(&self) -> bool {
        !self.divisor_invariant
    }
}

/// `p(x, tx)` as a series in `(x, t)`; keeps total degree `≤ N`, which is
/// exactly the range determined by `p`.
fn pull_back_t(p: &Poly2) -> Poly2 {
    let n = p.truncation();
    Poly2::from_terms(
        n,
        p.terms()
            .map(|(&(i, j), c)| (i + j, j, c.clone()))
            .filter(|&(i, j, _)| i + j <= n),
    )
}

/// `p(sy, y)` as a series in `(s, y)`.
fn pull_back_s(p: &Poly2) -> Poly2 {
    let n = p.truncation();
    Poly2::from_terms(
        n,
        p.terms()
            .map(|(&(i, j), c)| (i, i + j, c.clone()))
            .filter(|&(i, j, _)| i + j <= n),
    )
}

fn shift(p: &Poly2, di: u32, dj: u32) -> Poly2 {
    let n = p.truncation();
    Poly2::from_terms(
        n,
        p.terms()
            .map(|(&(i, j), c)| (i + di, j + dj, c.clone()))
            .filter(|&(i, j, _)| i + j <= n),
    )
}

/// Divides by `x^k` (`in_x`) or `y^k`, lowering the truncation by `k`.
fn divide_power(p: &Poly2, k: u32, in_x: bool) -> Poly2 {
    let n = p.truncation() - k;
    Poly2::from_terms(
        n,
        p.terms().map(|(&(i, j), c)| {
            if in_x {
                (i - k, j, c.clone())
            } else {
                (i, j - k, c.clone())
            }
        }),
    )
}

/// Coefficients of `h(1, t)` for a homogeneous `h` of degree `k`, in `t`.
fn dehomogenize_t(h: &Poly2, k: u32) -> UPoly {
    univariate::trim((0..=k).map(|j| h.coeff(k - j, j)).collect())
}

/// Coefficients of `h(s, 1)`, in `s`.
fn dehomogenize_s(h: &Poly2, k: u32) -> UPoly {
    univariate::trim((0..=k).map(|i| h.coeff(i, k - i)).collect())
}

fn mul_t(p: &[Coefficient]) -> UPoly {
    let mut out = vec![Coefficient::zero()];
    out.extend(p.iter().cloned());
    univariate::trim(out)
}

fn add(p: &[Coefficient], q: &[Coefficient]) -> UPoly {
    let n = p.len().max(q.len());
    univariate::trim(
        (0..n)
            .map(|k| {
                let a = p.get(k).cloned().unwrap_or_else(Coefficient::zero);
                let b = q.get(k).cloned().unwrap_or_else(Coefficient::zero);
                &a + &b
            })
            .collect(),
    )
}

fn coeff(p: &[Coefficient], k: usize) -> Coefficient {
    p.get(k).cloned().unwrap_or_else(Coefficient::zero)
}

fn describe_line(c: &[Coefficient]) -> String {
    let shown: Vec<String> = c.iter().map(|x| format!("({x})")).collect();
    format!("common root of [{}] in y = c·x", shown.join(", "))
}

/// Detects a common factor of `a` and `b` that is a coordinate axis or a
/// line `y = c·x` through the origin (`a(x, cx) ≡ b(x, cx) ≡ 0` to
/// truncation). Curved common factors are not detected.
fn check_isolated(a: &Poly2, b: &Poly2) -> Result<(), ComplexError> {
    if a.is_zero() && b.is_zero() {
        return Err(ComplexError::NotIsolated {
            factor: "both coefficients vanish".into(),
        });
    }
    let divisible_by_x = |p: &Poly2| p.terms().all(|(&(i, _), _)| i >= 1);
    if divisible_by_x(a) && divisible_by_x(b) {
        return Err(ComplexError::NotIsolated { factor: "x".into() });
    }
    // y = cx for finite c: c is a common root of every a_k(1, c), b_k(1, c).
    let n = a.truncation();
    let mut g: UPoly = Vec::new();
    for k in 0..=n {
        g = univariate::gcd(&g, &dehomogenize_t(&a.homogeneous_part(k), k));
        g = univariate::gcd(&g, &dehomogenize_t(&b.homogeneous_part(k), k));
        if univariate::degree(&g) == Some(0) {
            return Ok(());
        }
    }
    if univariate::degree(&g).is_some_and(|d| d > 0) {
        return Err(ComplexError::NotIsolated {
            factor: describe_line(&g),
        });
    }
    Ok(())
}

/// Blows up the origin. Singular data on `E` is read off the leading jets
/// exactly; root locations are floating point unless rational.
pub fn blowup(form: &OneForm2) -> Result<BlowupResult, ComplexError> {
    let form = form.to_complex();
    let (a, b) = (form.a(), form.b());
    check_isolated(a, b)?;
    let nu = a.valuation().min(b.valuation());
    let n = form.truncation();
    if nu == 0 {
        return Err(ComplexError::NotIsolated {
            factor: "form does not vanish at the origin".into(),
        });
    }
    let a_nu = a.homogeneous_part(nu);
    let b_nu = b.homogeneous_part(nu);
    let radial = Poly2::x(n).mul(&a_nu).add(&Poly2::y(n).mul(&b_nu));
    let dicritical = radial.homogeneous_part(nu + 1).is_zero();
    let power = if dicritical { nu + 1 } else { nu };
    if n < power + 1 {
        return Err(ComplexError::TruncationTooLow {
            truncation: n,
            needed: power + 1,
        });
    }

    // chart t: a dx + b dy with y = tx → (a + t b) dx + x b dt
    let (at, bt) = (pull_back_t(a), pull_back_t(b));
    let chart_t = OneForm2::new(
        divide_power(&at.add(&shift(&bt, 0, 1)), power, true),
        divide_power(&shift(&bt, 1, 0), power, true),
    );
    // chart s: x = sy → y a ds + (s a + b) dy
    let (as_, bs) = (pull_back_s(a), pull_back_s(b));
    let chart_s = OneForm2::new(
        divide_power(&shift(&as_, 0, 1), power, false),
        divide_power(&shift(&as_, 1, 0).add(&bs), power, false),
    );

    let a_t = dehomogenize_t(&a_nu, nu);
    let b_t = dehomogenize_t(&b_nu, nu);
    let a_s = dehomogenize_s(&a_nu, nu);
    let b_s = dehomogenize_s(&b_nu, nu);
    let mut points = Vec::new();
    if dicritical {
        // ω restricted to E is b_ν(1, t) dt, resp. a_ν(s, 1) ds.
        for r in univariate::roots(&b_t) {
            points.push(DivisorPoint {
                chart: Chart::T,
                location: r.value,
                exact_location: r.exact,
                multiplicity: r.multiplicity,
                eigenvalues: None,
            });
        }
        if coeff(&a_s, 0).is_zero() {
            points.push(DivisorPoint {
                chart: Chart::S,
                location: Complex64::zero(),
                exact_location: Some(Coefficient::zero()),
                multiplicity: 1,
                eigenvalues: None,
            });
        }
    } else {
        // ã(0, t) = a_ν(1, t) + t b_ν(1, t); b̃ vanishes on E.
        let p = add(&a_t, &mul_t(&b_t));
        let dp = univariate::derivative(&p);
        for r in univariate::roots(&p) {
            let transverse = univariate::evaluate(&b_t, r.value);
            let along = -univariate::evaluate(&dp, r.value);
            points.push(DivisorPoint {
                chart: Chart::T,
                location: r.value,
                exact_location: r.exact,
                multiplicity: r.multiplicity,
                eigenvalues: Some((transverse, along)),
            });
        }
        // s = 0 is singular iff q(s) = s a_ν(s, 1) + b_ν(s, 1) vanishes there.
        let q = add(&mul_t(&a_s), &b_s);
        if coeff(&q, 0).is_zero() {
            let multiplicity = q.iter().take_while(|c| c.is_zero()).count() as u32;
            let transverse = coeff(&a_s, 0).to_complex64();
            let along = -coeff(&q, 1).to_complex64();
            points.push(DivisorPoint {
                chart: Chart::S,
                location: Complex64::zero(),
                exact_location: Some(Coefficient::zero()),
                multiplicity,
                eigenvalues: Some((transverse, along)),
            });
        }
    }
    Ok(BlowupResult {
        order: nu,
        chart_t,
        chart_s,
        divided_power: power,
        divisor_invariant: !dicritical,
        singularities_on_e: points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(n: u32, t: &[(u32, u32, i64)]) -> Poly2 {
        Poly2::from_int_terms(n, t)
    }

    fn assert_ratio(p: &DivisorPoint, expected: f64) {
        let r = p.eigenvalue_ratio().unwrap();
        assert!((r - Complex64::new(expected, 0.0)).norm() < 1e-14, "{r}");
    }

    #[test]
    fn siegel_form_has_two_resonant_points() {
        let n = 6;
        let form = OneForm2::new(poly(n, &[(0, 1, 1)]), poly(n, &[(1, 0, 1)]));
        let r = blowup(&form).unwrap();
        assert!(r.divisor_invariant);
        assert!(r.chart_t.a().agrees_with(&poly(n - 1, &[(0, 1, 2)])));
        assert!(r.chart_t.b().agrees_with(&poly(n - 1, &[(1, 0, 1)])));
        assert_eq!(r.singularities_on_e.len(), 2);
        let t0 = &r.singularities_on_e[0];
        assert_eq!((t0.chart, t0.exact_location.clone()), (Chart::T, Some(Coefficient::zero())));
        assert_ratio(t0, -0.5);
        let s0 = &r.singularities_on_e[1];
        assert_eq!(s0.chart, Chart::S);
        assert_ratio(s0, -0.5);
    }

    #[test]
    fn radial_form_is_dicritical() {
        let n = 6;
        let form = OneForm2::new(poly(n, &[(0, 1, -1)]), poly(n, &[(1, 0, 1)]));
        let r = blowup(&form).unwrap();
        assert!(!r.divisor_invariant);
        assert_eq!(r.divided_power, 2);
        assert!(r.chart_t.a().is_zero());
        assert!(r.chart_t.b().agrees_with(&Poly2::one(n - 2)));
        assert!(r.singularities_on_e.is_empty());
    }

    #[test]
    fn exact_radius_form() {
        let n = 6;
        let f = poly(n + 1, &[(2, 0, 1), (0, 2, 1)]);
        let r = blowup(&OneForm2::exact(&f)).unwrap();
        assert!(r.divisor_invariant);
        // (1 + t²)·2 dx + 2tx dt after dividing by x
        assert!(r.chart_t.a().agrees_with(&poly(n - 1, &[(0, 0, 2), (0, 2, 2)])));
        assert!(r.chart_t.b().agrees_with(&poly(n - 1, &[(1, 1, 2)])));
        let locs: Vec<Complex64> = r.singularities_on_e.iter().map(|p| p.location).collect();
        assert_eq!(locs.len(), 2);
        assert!((locs[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((locs[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn common_factors_rejected() {
        let n = 6;
        let x_factor = OneForm2::new(poly(n, &[(1, 1, 1)]), poly(n, &[(2, 0, 1)]));
        assert!(matches!(blowup(&x_factor), Err(ComplexError::NotIsolated { .. })));
        // (y − x)·(dx + 2 dy)
        let line = OneForm2::new(poly(n, &[(0, 1, 1), (1, 0, -1)]), poly(n, &[(0, 1, 2), (1, 0, -2)]));
        assert!(matches!(blowup(&line), Err(ComplexError::NotIsolated { .. })));
        let zero = OneForm2::new(Poly2::zero(n), Poly2::zero(n));
        assert!(blowup(&zero).is_err());
    }
}
