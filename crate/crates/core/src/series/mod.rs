//! Exact truncated bivariate series and the Lie-derivative calculus.

mod coefficient;
mod field;
pub mod linalg;
mod poly;

use thiserror::Error;

pub use coefficient::{Coefficient, ParseCoefficientError};
pub use field::{lie_derivative, OneForm2, VectorField2};
pub use poly::{Exponent, Matrix2, Poly2};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SeriesError {
    #[error("linear substitution matrix is singular")]
    SingularMatrix,
    #[error("exponent ({i}, {j}) exceeds truncation degree {truncation}")]
    ExponentOutOfRange { i: u32, j: u32, truncation: u32 },
}

/// `f ∘ (m·(x, y))`, see [`Poly2::linear_change`].
pub fn linear_change(f: &Poly2, m: &Matrix2) -> Result<Poly2, SeriesError> {
    f.linear_change(m)
}

/// `(x² + y²)^j` at the given truncation.
pub fn radius_power(j: u32, truncation: u32) -> Poly2 {
    Poly2::from_int_terms(truncation, &[(2, 0, 1), (0, 2, 1)]).pow(j)
}

/// `(xy)^j` at the given truncation.
pub fn resonant_monomial(j: u32, truncation: u32) -> Poly2 {
    Poly2::monomial(j, j, Coefficient::from_int(1), truncation)
}
