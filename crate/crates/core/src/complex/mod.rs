//! The complex-analytic side of a rotation-type singularity.
//!
//! A real normalized field is complexified into a 1-form with linear part
//! `x dy + y dx` ([`SiegelForm`]). From there:
//!
//! * [`blowup`] reads the singular points on the exceptional divisor from the
//!   two affine charts of the quadratic blow-up;
//! * [`formal_first_integral_siegel`] builds `F = xy + …` with `dF ∧ ω = 0`
//!   degree by degree and reports the resonant obstructions;
//! * [`factor_fg`] splits `F` into its two smooth branches `f·g`;
//! * [`real_slice`] samples the real surface `{f = conj(g)}` and checks that
//!   `f·g = |f|²` is real and nonnegative there, with contact order one
//!   against the foliation.

mod blowup;
mod factor;
mod siegel;
mod slice;
pub mod univariate;

use thiserror::Error;

pub use blowup::{blowup, BlowupResult, Chart, DivisorPoint};
pub use factor::{factor_fg, FactorPair};
pub use siegel::{
    complexify, formal_first_integral_siegel, siegel_check, siegel_matrix, SiegelForm,
    SiegelIntegral,
};
pub use slice::{
    contact_order, real_slice, slice_tangent_basis, RealSlice, SlicePoint, SliceGrid,
    SliceVerification,
};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ComplexError {
    #[error("1-form is not in Siegel form (linear part must be exactly x dy + y dx)")]
    NotSiegel,
    #[error("singularity is not isolated: the coefficients share the factor {factor}")]
    NotIsolated { factor: String },
    #[error("branch solve failed at degree {degree}")]
    BranchFailure { degree: u32 },
    #[error("F must be xy plus terms of degree at least 3")]
    NotMorseQuadric,
    #[error("branches are not in general position (linear parts dependent)")]
    NotGeneralPosition,
    #[error("no seed converged onto the real slice")]
    NoSamples,
    #[error("the 1-form vanishes at the sample point")]
    SingularPoint,
    #[error("truncation degree {truncation} too low; at least {needed} required")]
    TruncationTooLow { truncation: u32, needed: u32 },
    #[error("invalid sampling grid: {0}")]
    InvalidGrid(String),
}
