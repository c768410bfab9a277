//! Planar vector fields `P ∂x + Q ∂y` and 1-forms `a dx + b dy` with
//! truncated series components.

use num_complex::Complex64;
use num_traits::Zero;

use super::coefficient::Coefficient;
use super::poly::{Matrix2, Poly2};

/// Shared truncation and reality flag for a pair of components.
fn coherent(p: Poly2, q: Poly2) -> (Poly2, Poly2) {
    let n = p.truncation().min(q.truncation());
    let (p, q) = (p.truncate(n), q.truncate(n));
    if p.is_real() && q.is_real() {
        (p, q)
    } else {
        (p.to_complex(), q.to_complex())
    }
}

fn linear_coefficients(f: &Poly2) -> [Coefficient; 2] {
    [f.coeff(1, 0), f.coeff(0, 1)]
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField2 {
    p: Poly2,
    q: Poly2,
}

impl VectorField2 {
    /// Components are cut to a common truncation; if either is complex both
    /// are flagged complex.
    pub fn new(p: Poly2, q: Poly2) -> Self {
        let (p, q) = coherent(p, q);
        Self { p, q }
    }

    pub fn p(&self) -> &Poly2 {
        &self.p
    }

    pub fn q(&self) -> &Poly2 {
        &self.q
    }

    pub fn truncation(&self) -> u32 {
        self.p.truncation()
    }

    pub fn is_real(&self) -> bool {
        self.p.is_real()
    }

    pub fn singular_at_origin(&self) -> bool {
        self.p.constant_term().is_zero() && self.q.constant_term().is_zero()
    }

    /// The Jacobian `DX(0)`: rows are the linear coefficients of `P` and `Q`.
    pub fn linear_part(&self) -> Matrix2 {
        [linear_coefficients(&self.p), linear_coefficients(&self.q)]
    }

    pub fn homogeneous_part(&self, k: u32) -> VectorField2 {
        Self::new(self.p.homogeneous_part(k), self.q.homogeneous_part(k))
    }

    pub fn scale(&self, s: &Coefficient) -> VectorField2 {
        Self::new(self.p.scale(s), self.q.scale(s))
    }

    /// `X(f) = P ∂f/∂x + Q ∂f/∂y`.
    ///
    /// The result keeps every degree the inputs determine: when the field
    /// vanishes at the origin nothing is lost to the derivative, otherwise
    /// the result is known to `N − 1`.
    pub fn lie_derivative(&self, f: &Poly2) -> Poly2 {
        let a = self.p.mul_tight(&f.partial_x());
        let b = self.q.mul_tight(&f.partial_y());
        a.add(&b)
    }

    pub fn evaluate(&self, point: (Complex64, Complex64)) -> (Complex64, Complex64) {
        (self.p.evaluate(point), self.q.evaluate(point))
    }

    /// The annihilating 1-form `−Q dx + P dy`.
    pub fn dual_form(&self) -> OneForm2 {
        OneForm2::new(self.q.neg(), self.p.clone())
    }
}

/// Free-function form of [`VectorField2::lie_derivative`].
pub fn lie_derivative(field: &VectorField2, f: &Poly2) -> Poly2 {
    field.lie_derivative(f)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneForm2 {
    a: Poly2,
    b: Poly2,
}

impl OneForm2 {
    pub fn new(a: Poly2, b: Poly2) -> Self {
        let (a, b) = coherent(a, b);
        Self { a, b }
    }

    /// `dF`.
    pub fn exact(f: &Poly2) -> Self {
        Self::new(f.partial_x(), f.partial_y())
    }

    /// Coefficient of `dx`.
    pub fn a(&self) -> &Poly2 {
        &self.a
    }

    /// Coefficient of `dy`.
    pub fn b(&self) -> &Poly2 {
        &self.b
    }

    pub fn truncation(&self) -> u32 {
        self.a.truncation()
    }

    pub fn is_real(&self) -> bool {
        self.a.is_real()
    }

    pub fn singular_at_origin(&self) -> bool {
        self.a.constant_term().is_zero() && self.b.constant_term().is_zero()
    }

    /// Rows: linear coefficients of `a` and of `b`.
    pub fn linear_part(&self) -> Matrix2 {
        [linear_coefficients(&self.a), linear_coefficients(&self.b)]
    }

    pub fn to_complex(&self) -> OneForm2 {
        Self::new(self.a.to_complex(), self.b.to_complex())
    }

    pub fn scale(&self, s: &Coefficient) -> OneForm2 {
        Self::new(self.a.scale(s), self.b.scale(s))
    }

    /// The `dx∧dy` coefficient of `dF ∧ ω`, i.e. `F_x b − F_y a`.
    pub fn wedge_differential(&self, f: &Poly2) -> Poly2 {
        let fx_b = f.partial_x().mul_tight(&self.b);
        let fy_a = f.partial_y().mul_tight(&self.a);
        fx_b.sub(&fy_a)
    }

    /// The vector field `b ∂x − a ∂y`, tangent to the kernel of the form.
    pub fn kernel_field(&self) -> VectorField2 {
        VectorField2::new(self.b.clone(), self.a.neg())
    }

    pub fn evaluate(&self, point: (Complex64, Complex64)) -> (Complex64, Complex64) {
        (self.a.evaluate(point), self.b.evaluate(point))
    }
}
