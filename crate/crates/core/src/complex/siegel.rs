//! Complexification to Siegel form and the formal `xy + …` first integral.

use num_traits::{One, Zero};

use super::ComplexError;
use crate::center::{Obstruction, RotationNormalization};
use crate::series::{resonant_monomial, Coefficient, Matrix2, OneForm2, Poly2};

/// A 1-form `x dy + y dx + ω̃` with `ω̃` of order at least two.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SiegelForm {
    form: OneForm2,
    /// `(x, y) = M·(u, v)` when the form came from [`complexify`].
    change_record: Option<Matrix2>,
}

impl SiegelForm {
    pub fn new(form: OneForm2) -> Result<Self, ComplexError> {
        if !siegel_check(&form) {
            return Err(ComplexError::NotSiegel);
        }
        Ok(Self {
            form: form.to_complex(),
            change_record: None,
        })
    }

    pub fn form(&self) -> &OneForm2 {
        &self.form
    }

    pub fn change_record(&self) -> Option<&Matrix2> {
        self.change_record.as_ref()
    }

    pub fn truncation(&self) -> u32 {
        self.form.truncation()
    }

    /// `ω̃ = ω − (x dy + y dx)`.
    pub fn remainder(&self) -> OneForm2 {
        let n = self.truncation();
        OneForm2::new(
            self.form.a().sub(&Poly2::y(n)),
            self.form.b().sub(&Poly2::x(n)),
        )
    }
}

/// `(x, y) = M·(u, v)` inverting `u = x + iy`, `v = x − iy`.
pub fn siegel_matrix() -> Matrix2 {
    let half = Coefficient::ratio(1, 2);
    let i_half = Coefficient::gaussian(0, 1, 1, 2);
    [[half.clone(), half], [-&i_half, i_half]]
}

/// Linear part exactly `y dx + x dy` and no constant terms.
pub fn siegel_check(form: &OneForm2) -> bool {
    let zero = Coefficient::zero;
    let one = Coefficient::one;
    form.singular_at_origin() && form.linear_part() == [[zero(), one()], [one(), zero()]]
}

/// Complex coordinates `u = x + iy`, `v = x − iy` for a normalized real
/// field, then the dual 1-form scaled so its linear part is `v du + u dv`.
///
/// With `U = u̇`, `V = v̇` the form is `iV du − iU dv`; for the rotation
/// `U = iu`, `V = −iv`. The result is written in `(x, y)` for `(u, v)`.
pub fn complexify(norm: &RotationNormalization) -> SiegelForm {
    let m = siegel_matrix();
    let field = &norm.normalized;
    let p = field.p().to_complex().linear_change(&m).expect("invertible");
    let q = field.q().to_complex().linear_change(&m).expect("invertible");
    let i = Coefficient::i();
    let iq = q.scale(&i);
    let u_dot = p.add(&iq);
    let v_dot = p.sub(&iq);
    let form = OneForm2::new(v_dot.scale(&i), u_dot.scale(&-&i));
    debug_assert!(siegel_check(&form));
    SiegelForm {
        form,
        change_record: Some(m),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SiegelIntegral {
    pub truncation_degree: u32,
    pub first_integral: Poly2,
    /// Coefficient of `(xy)^j` in `dF ∧ ω`, for `j ≥ 2` and `2j ≤ N`.
    pub obstructions: Vec<Obstruction>,
    pub first_nonzero: Option<u32>,
}

impl SiegelIntegral {
    pub fn is_formal_first_integral(&self) -> bool {
        self.first_nonzero.is_none()
    }

    /// `dF ∧ ω − Σ_j c_j (xy)^j`, zero to truncation by construction.
    pub fn defect(&self, form: &OneForm2) -> Poly2 {
        let n = self.truncation_degree;
        let resonant = self.obstructions.iter().fold(Poly2::zero(n), |acc, o| {
            acc.add(&resonant_monomial(o.index, n).scale(&o.value))
        });
        form.wedge_differential(&self.first_integral)
            .truncate(n)
            .sub(&resonant)
    }
}

/// Builds `F = xy + Σ_{k≥3} F_k` with `dF ∧ ω` reduced to resonant terms.
///
/// On degree `k` the linear part acts as `x^i y^j ↦ (i − j) x^i y^j`, so every
/// non-resonant coefficient is solved by division; the resonant coefficient
/// of `(xy)^j` in `F` is set to zero and the residual there is the
/// obstruction. Works at `min(N, T + 1)` for a form known to degree `T`.
pub fn formal_first_integral_siegel(
    form: &SiegelForm,
    order: u32,
) -> Result<SiegelIntegral, ComplexError> {
    let n = order.min(form.truncation() + 1);
    if n < 2 {
        return Err(ComplexError::TruncationTooLow {
            truncation: n,
            needed: 2,
        });
    }
    let omega = form.form();
    let mut f = resonant_monomial(1, n).to_complex();
    let mut obstructions = Vec::new();
    for k in 3..=n {
        // F_k is zero so far: the degree-k part of dF ∧ ω is the residual.
        let residual = omega.wedge_differential(&f).homogeneous_part(k);
        for i in 0..=k {
            let j = k - i;
            let r = residual.coeff(i, j);
            if i == j {
                obstructions.push(Obstruction { index: i, value: r });
            } else if !r.is_zero() {
                let weight = Coefficient::from_int(i as i64 - j as i64);
                f.set_coeff(i, j, -(&r / &weight));
            }
        }
    }
    let first_nonzero = obstructions
        .iter()
        .find(|o| !o.value.is_zero())
        .map(|o| o.index);
    Ok(SiegelIntegral {
        truncation_degree: n,
        first_integral: f,
        obstructions,
        first_nonzero,
    })
}
