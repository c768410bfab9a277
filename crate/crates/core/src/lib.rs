//! Symbolic and numeric tools for planar analytic singularities whose linear
//! part generates a rotation.
//!
//! * [`series`]: exact truncated bivariate series over `Q(i)`, vector fields,
//!   1-forms and the Lie derivative.
//! * [`germ`]: one-variable diffeomorphism germs, finite-order detection and
//!   numeric pseudo-orbits.
//! * [`center`]: rotation normalization, Lyapunov obstructions and the
//!   center/focus verdict to a truncation order.
//! * [`complex`]: complexification to Siegel form, quadratic blow-up, formal
//!   `f·g` first integrals and totally real slices.
//! * [`flow`]: adaptive integration, half and full return maps, periodic
//!   sequence detection and bounded-order scans.

pub mod center;
pub mod complex;
pub mod flow;
pub mod germ;
pub mod series;
