//! Germs of one-dimensional diffeomorphisms fixing the origin.
//!
//! A [`Germ1`] is `f(z) = λz + a₂z² + … + a_N z^N + O(z^{N+1})` with exact
//! `Q(i)` coefficients. Composition and inversion are truncated at the
//! smaller degree. [`finite_order`] decides whether some iterate is the
//! identity by the root-of-unity / tangent-to-identity dichotomy, and
//! [`pseudo_orbit`] follows numeric iterates of the truncated polynomial.

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::series::Coefficient;

/// Iterates closer than this to the seed count as a return.
pub const PERIOD_TOLERANCE: f64 = 1e-9;
/// Default escape radius for numeric pseudo-orbits.
pub const DEFAULT_ESCAPE_RADIUS: f64 = 1.0;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GermError {
    #[error("multiplier f'(0) is zero; not a diffeomorphism")]
    ZeroMultiplier,
    #[error("coefficient degree {degree} outside 1..={truncation}")]
    DegreeOutOfRange { degree: u32, truncation: u32 },
    #[error(
        "f^{order} is the identity to degree {truncation}, \
         but at least degree {needed} is needed to decide; retry with a higher truncation"
    )]
    Inconclusive {
        order: u32,
        truncation: u32,
        needed: u32,
    },
    #[error("k_max must be at least 1")]
    InvalidBound,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Germ1 {
    truncation: u32,
    /// `coeffs[k - 1]` is the coefficient of `z^k`.
    coeffs: Vec<Coefficient>,
}

impl Germ1 {
    pub fn new<I>(truncation: u32, terms: I) -> Result<Self, GermError>
    where
        I: IntoIterator<Item = (u32, Coefficient)>,
    {
        let mut coeffs = vec![Coefficient::zero(); truncation as usize];
        for (degree, c) in terms {
            if degree == 0 || degree > truncation {
                return Err(GermError::DegreeOutOfRange { degree, truncation });
            }
            coeffs[degree as usize - 1] += &c;
        }
        if coeffs.first().is_none_or(Coefficient::is_zero) {
            return Err(GermError::ZeroMultiplier);
        }
        Ok(Self { truncation, coeffs })
    }

    pub fn identity(truncation: u32) -> Self {
        Self::linear(Coefficient::one(), truncation)
    }

    /// `λz`. Panics if `λ = 0`.
    pub fn linear(multiplier: Coefficient, truncation: u32) -> Self {
        Self::new(truncation, [(1, multiplier)]).expect("nonzero multiplier")
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    /// `λ = f'(0)`.
    pub fn multiplier(&self) -> &Coefficient {
        &self.coeffs[0]
    }

    pub fn coeff(&self, degree: u32) -> Coefficient {
        match degree {
            0 => Coefficient::zero(),
            d if d > self.truncation => Coefficient::zero(),
            d => self.coeffs[d as usize - 1].clone(),
        }
    }

    /// Nonzero `(degree, coefficient)` pairs in increasing degree.
    pub fn terms(&self) -> impl Iterator<Item = (u32, &Coefficient)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (k as u32 + 1, c))
    }

    pub fn is_identity(&self) -> bool {
        self.multiplier().is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// Lowest degree `≥ 2` with a nonzero coefficient.
    pub fn first_nonlinear_degree(&self) -> Option<u32> {
        self.coeffs[1..]
            .iter()
            .position(|c| !c.is_zero())
            .map(|k| k as u32 + 2)
    }

    pub fn truncate(&self, n: u32) -> Germ1 {
        if n >= self.truncation {
            return self.clone();
        }
        Germ1 {
            truncation: n,
            coeffs: self.coeffs[..n as usize].to_vec(),
        }
    }

    /// `f ∘ g`, truncated at `min(N_f, N_g)`.
    pub fn compose(&self, g: &Germ1) -> Germ1 {
        let n = self.truncation.min(g.truncation) as usize;
        let inner: Vec<Coefficient> = g.coeffs[..n].to_vec();
        let mut result = vec![Coefficient::zero(); n];
        // power[k] holds the coefficients of g^m at degree k + 1.
        let mut power = inner.clone();
        for m in 1..=n {
            let a = &self.coeffs[m - 1];
            if !a.is_zero() {
                for (r, p) in result.iter_mut().zip(&power) {
                    *r += &(a * p);
                }
            }
            if m < n {
                power = mul_truncated(&power, &inner, n);
            }
        }
        Germ1 {
            truncation: n as u32,
            coeffs: result,
        }
    }

    /// Compositional inverse: `self.compose(&inv)` is the identity to
    /// truncation.
    pub fn invert(&self) -> Germ1 {
        let n = self.truncation as usize;
        let inv_lambda = self.multiplier().inv().expect("nonzero multiplier");
        let mut g = Germ1 {
            truncation: self.truncation,
            coeffs: vec![Coefficient::zero(); n],
        };
        g.coeffs[0] = inv_lambda.clone();
        for k in 2..=n {
            // With g_k still zero, f∘g has degree-k coefficient c_k; adding
            // g_k contributes λ g_k there and only affects higher degrees
            // otherwise.
            let c_k = self.truncate(k as u32).compose(&g.truncate(k as u32)).coeffs[k - 1].clone();
            g.coeffs[k - 1] = -(&c_k * &inv_lambda);
        }
        g
    }

    /// `f^k` for `k ≥ 0` (`f⁰` is the identity).
    pub fn iterate(&self, k: u32) -> Germ1 {
        let mut acc = Germ1::identity(self.truncation);
        for _ in 0..k {
            acc = self.compose(&acc);
        }
        acc
    }

    /// `g⁻¹ ∘ f ∘ g`.
    pub fn conjugate_by(&self, g: &Germ1) -> Germ1 {
        g.invert().compose(&self.compose(g))
    }

    /// Numeric value of the truncated polynomial (Horner).
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| (acc + c.to_complex64()) * z)
    }

    fn numeric_coeffs(&self) -> Vec<Complex64> {
        self.coeffs.iter().map(Coefficient::to_complex64).collect()
    }
}

fn mul_truncated(a: &[Coefficient], b: &[Coefficient], n: usize) -> Vec<Coefficient> {
    // Both index k ↔ degree k + 1; the product has degree ≥ 2.
    let mut out = vec![Coefficient::zero(); n];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            let deg = i + j + 2;
            if deg > n {
                break;
            }
            if !bj.is_zero() {
                out[deg - 1] += &(ai * bj);
            }
        }
    }
    out
}

/// Order of a root of unity, exactly, for multipliers in `Q(i)`.
///
/// The only roots of unity in `Q(i)` are `±1` and `±i`, so anything else
/// returns `None`.
pub fn multiplier_order(lambda: &Coefficient) -> Option<u32> {
    let one = Coefficient::one();
    if *lambda == one {
        Some(1)
    } else if *lambda == -&one {
        Some(2)
    } else if *lambda == Coefficient::i() || *lambda == -&Coefficient::i() {
        Some(4)
    } else {
        None
    }
}

/// A multiplier given symbolically as `exp(2πi·p/q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RootOfUnity {
    pub p: i64,
    pub q: i64,
}

impl RootOfUnity {
    /// Multiplicative order `q / gcd(p, q)`. Panics if `q ≤ 0`.
    pub fn order(&self) -> u32 {
        assert!(self.q > 0, "denominator must be positive");
        (self.q / self.p.gcd(&self.q)) as u32
    }

    pub fn to_complex64(&self) -> Complex64 {
        Complex64::from_polar(1.0, std::f64::consts::TAU * self.p as f64 / self.q as f64)
    }

    /// The exact value when it lies in `Q(i)` (orders 1, 2 and 4).
    pub fn to_coefficient(&self) -> Option<Coefficient> {
        let g = self.p.gcd(&self.q);
        let (p, q) = ((self.p / g).rem_euclid(self.q / g), self.q / g);
        match (p, q) {
            (0, 1) => Some(Coefficient::one()),
            (1, 2) => Some(Coefficient::from_int(-1)),
            (1, 4) => Some(Coefficient::i()),
            (3, 4) => Some(-Coefficient::i()),
            _ => None,
        }
    }
}

/// Smallest `k ≤ k_max` with `f^k = Id` to truncation, or `None`.
///
/// If the multiplier is not a root of unity of order `m ≤ k_max` there is no
/// such `k`. Otherwise `f^m` is either the identity (order `m`) or
/// `z + a z^{l+1} + …` with `a ≠ 0`, whose iterates are never the identity.
/// When `f^m` is the identity to degree `N` but `N < 2m`, the truncation is
/// too short to trust that and [`GermError::Inconclusive`] is returned.
pub fn finite_order(f: &Germ1, k_max: u32) -> Result<Option<u32>, GermError> {
    if k_max == 0 {
        return Err(GermError::InvalidBound);
    }
    let Some(m) = multiplier_order(f.multiplier()) else {
        return Ok(None);
    };
    finite_order_with_multiplier_order(f, m, k_max)
}

/// [`finite_order`] with the multiplier's root-of-unity order supplied by the
/// caller.
pub fn finite_order_with_multiplier_order(
    f: &Germ1,
    m: u32,
    k_max: u32,
) -> Result<Option<u32>, GermError> {
    if k_max == 0 {
        return Err(GermError::InvalidBound);
    }
    if m > k_max {
        return Ok(None);
    }
    let fm = f.iterate(m);
    if !fm.is_identity() {
        return Ok(None);
    }
    let needed = 2 * m;
    if f.truncation() < needed {
        return Err(GermError::Inconclusive {
            order: m,
            truncation: f.truncation(),
            needed,
        });
    }
    Ok(Some(m))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OrbitOutcome {
    /// First return to the seed after `period` iterations.
    Periodic { period: u32 },
    /// Left the escape disc at iteration `step`.
    Escaped { step: u32 },
    /// Neither within the iteration budget.
    Undecided,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PseudoOrbit {
    pub seed: Complex64,
    pub iterates: Vec<Complex64>,
    pub outcome: OrbitOutcome,
    pub tolerance: f64,
}

impl PseudoOrbit {
    pub fn period(&self) -> Option<u32> {
        match self.outcome {
            OrbitOutcome::Periodic { period } => Some(period),
            _ => None,
        }
    }
}

/// Iterates the truncated polynomial from `z0` with the default return
/// tolerance [`PERIOD_TOLERANCE`].
pub fn pseudo_orbit(f: &Germ1, z0: Complex64, k_max: u32, escape_radius: f64) -> PseudoOrbit {
    pseudo_orbit_with_tolerance(f, z0, k_max, escape_radius, PERIOD_TOLERANCE)
}

pub fn pseudo_orbit_with_tolerance(
    f: &Germ1,
    z0: Complex64,
    k_max: u32,
    escape_radius: f64,
    tolerance: f64,
) -> PseudoOrbit {
    iterate_numeric(f.numeric_coeffs(), z0, k_max, escape_radius, tolerance)
}

/// [`pseudo_orbit_with_tolerance`] with the linear coefficient replaced by a
/// floating-point multiplier, for multipliers such as `exp(2πi/3)` that have
/// no exact value in `Q(i)`.
pub fn pseudo_orbit_with_multiplier(
    f: &Germ1,
    multiplier: Complex64,
    z0: Complex64,
    k_max: u32,
    escape_radius: f64,
    tolerance: f64,
) -> PseudoOrbit {
    let mut coeffs = f.numeric_coeffs();
    coeffs[0] = multiplier;
    iterate_numeric(coeffs, z0, k_max, escape_radius, tolerance)
}

fn iterate_numeric(
    coeffs: Vec<Complex64>,
    z0: Complex64,
    k_max: u32,
    escape_radius: f64,
    tolerance: f64,
) -> PseudoOrbit {
    let eval = |z: Complex64| {
        coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| (acc + c) * z)
    };
    let mut iterates = vec![z0];
    let mut z = z0;
    let mut outcome = OrbitOutcome::Undecided;
    for n in 1..=k_max {
        z = eval(z);
        iterates.push(z);
        if !z.is_finite() || z.norm() >= escape_radius {
            outcome = OrbitOutcome::Escaped { step: n };
            break;
        }
        if (z - z0).norm() <= tolerance {
            outcome = OrbitOutcome::Periodic { period: n };
            break;
        }
    }
    PseudoOrbit {
        seed: z0,
        iterates,
        outcome,
        tolerance,
    }
}

/// Pseudo-orbit periods over a family of seed points: the sampled form of
/// "finite pseudo-orbits of uniformly bounded order".
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitOrderSurvey {
    pub orbits: Vec<PseudoOrbit>,
}

impl OrbitOrderSurvey {
    pub fn run(f: &Germ1, seeds: &[Complex64], k_max: u32, escape_radius: f64, tolerance: f64) -> Self {
        Self {
            orbits: seeds
                .iter()
                .map(|&z| pseudo_orbit_with_tolerance(f, z, k_max, escape_radius, tolerance))
                .collect(),
        }
    }

    /// True if every sampled orbit closed up within `k` iterations.
    pub fn uniformly_bounded_by(&self, k: u32) -> bool {
        self.orbits
            .iter()
            .all(|o| o.period().is_some_and(|p| p <= k))
    }

    pub fn max_period(&self) -> Option<u32> {
        self.orbits.iter().filter_map(PseudoOrbit::period).max()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: i64) -> Coefficient {
        Coefficient::from_int(n)
    }

    fn z_plus_z2(n: u32) -> Germ1 {
        Germ1::new(n, [(1, c(1)), (2, c(1))]).unwrap()
    }

    #[test]
    fn compose_examples() {
        let g = Germ1::new(5, [(1, c(3)), (2, c(-1)), (4, Coefficient::i())]).unwrap();
        assert_eq!(Germ1::identity(5).compose(&g), g);

        let f = z_plus_z2(4);
        let expected = Germ1::new(4, [(1, c(1)), (2, c(2)), (3, c(2)), (4, c(1))]).unwrap();
        assert_eq!(f.compose(&f), expected);

        let rot = Germ1::linear(Coefficient::i(), 6);
        assert_eq!(rot.compose(&rot), Germ1::linear(c(-1), 6));
    }

    #[test]
    fn invert_examples() {
        assert_eq!(Germ1::linear(c(2), 4).invert(), Germ1::linear(Coefficient::ratio(1, 2), 4));
        let expected = Germ1::new(4, [(1, c(1)), (2, c(-1)), (3, c(2)), (4, c(-5))]).unwrap();
        assert_eq!(z_plus_z2(4).invert(), expected);

        let f = Germ1::new(9, [(1, Coefficient::i()), (3, c(1))]).unwrap();
        let inv = f.invert();
        assert!(f.compose(&inv).is_identity());
        assert!(inv.compose(&f).is_identity());
    }

    #[test]
    fn finite_order_examples() {
        assert_eq!(finite_order(&Germ1::linear(Coefficient::i(), 8), 10), Ok(Some(4)));

        let rot = Germ1::linear(Coefficient::i(), 16);
        let conj = rot.conjugate_by(&z_plus_z2(16));
        assert!(conj.first_nonlinear_degree().is_some());
        assert_eq!(finite_order(&conj, 10), Ok(Some(4)));

        assert_eq!(finite_order(&z_plus_z2(12), 50), Ok(None));
        assert_eq!(finite_order(&Germ1::linear(c(2), 8), 50), Ok(None));
        // Order 4 exceeds the bound.
        assert_eq!(finite_order(&Germ1::linear(Coefficient::i(), 8), 3), Ok(None));
    }

    #[test]
    fn short_truncation_is_inconclusive() {
        let f = Germ1::linear(Coefficient::i(), 6);
        assert_eq!(
            finite_order(&f, 10),
            Err(GermError::Inconclusive { order: 4, truncation: 6, needed: 8 })
        );
    }

    #[test]
    fn root_of_unity_orders() {
        assert_eq!(RootOfUnity { p: 3, q: 12 }.order(), 4);
        assert_eq!(RootOfUnity { p: 3, q: 12 }.to_coefficient(), Some(Coefficient::i()));
        assert_eq!(RootOfUnity { p: 5, q: 10 }.to_coefficient(), Some(c(-1)));
        assert_eq!(RootOfUnity { p: 1, q: 3 }.order(), 3);
        assert_eq!(RootOfUnity { p: 1, q: 3 }.to_coefficient(), None);
        let cubic = RootOfUnity { p: 1, q: 3 };
        let f = Germ1::identity(8);
        let o = pseudo_orbit_with_multiplier(
            &f,
            cubic.to_complex64(),
            Complex64::new(0.1, 0.0),
            10,
            1.0,
            PERIOD_TOLERANCE,
        );
        assert_eq!(o.period(), Some(3));
    }

    #[test]
    fn pseudo_orbit_examples() {
        let neg = Germ1::linear(c(-1), 8);
        let orbit = pseudo_orbit(&neg, Complex64::new(0.1, 0.0), 10, DEFAULT_ESCAPE_RADIUS);
        assert_eq!(orbit.outcome, OrbitOutcome::Periodic { period: 2 });

        // Positive real orbit of z + z² increases monotonically.
        let orbit = pseudo_orbit(&z_plus_z2(8), Complex64::new(0.05, 0.0), 200, DEFAULT_ESCAPE_RADIUS);
        assert!(orbit.period().is_none());
        for w in orbit.iterates.windows(2) {
            assert!(w[1].re > w[0].re);
        }
    }

    #[test]
    fn zero_multiplier_rejected() {
        assert_eq!(Germ1::new(4, [(2, c(1))]), Err(GermError::ZeroMultiplier));
        assert!(matches!(
            Germ1::new(4, [(5, c(1))]),
            Err(GermError::DegreeOutOfRange { .. })
        ));
    }
}
