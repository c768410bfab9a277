//! Splitting `F = xy + …` into its two smooth branches through the origin.

use num_traits::{One, Zero};

use super::ComplexError;
use crate::series::{Coefficient, Poly2};

/// `F = f·g` to truncation, with `f = (y − a(x))·unit` and `g = x − b(y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorPair {
    pub f: Poly2,
    pub g: Poly2,
    /// `y − a(x)`, the branch `{f = 0}`.
    pub branch_f: Poly2,
    /// `x − b(y)`, the branch `{g = 0}`.
    pub branch_g: Poly2,
    /// `F / (branch_f · branch_g)`, with constant term 1.
    pub unit: Poly2,
    pub general_position: bool,
}

impl FactorPair {
    /// A pair given directly, with trivial unit.
    pub fn new(f: Poly2, g: Poly2) -> Self {
        let general_position = independent_linear_parts(&f, &g);
        let unit = Poly2::one(f.truncation().min(g.truncation()));
        Self {
            branch_f: f.clone(),
            branch_g: g.clone(),
            f,
            g,
            unit,
            general_position,
        }
    }

    /// `f·g`, known to `min(N_f + 1, N_g + 1)` when both vanish at 0.
    pub fn product(&self) -> Poly2 {
        self.f.mul_tight(&self.g)
    }

    /// `branch_f · branch_g · unit`.
    pub fn reconstruction(&self) -> Poly2 {
        self.branch_f.mul_tight(&self.branch_g).mul_tight(&self.unit)
    }
}

fn independent_linear_parts(f: &Poly2, g: &Poly2) -> bool {
    let det = &(&f.coeff(1, 0) * &g.coeff(0, 1)) - &(&f.coeff(0, 1) * &g.coeff(1, 0));
    f.constant_term().is_zero() && g.constant_term().is_zero() && !det.is_zero()
}

fn swap(p: &Poly2) -> Poly2 {
    Poly2::from_terms(
        p.truncation(),
        p.terms().map(|(&(i, j), c)| (j, i, c.clone())),
    )
}

/// `[1, a, a², …, a^k]` at truncation `n`.
fn powers(a: &Poly2, k: u32, n: u32) -> Vec<Poly2> {
    let a = a.truncate(n);
    let mut out = vec![Poly2::one(n)];
    for _ in 0..k {
        let next = out.last().expect("nonempty").mul(&a);
        out.push(next);
    }
    out
}

/// `F(x, a(x))` for `a` a series in `x` alone.
fn substitute_y(f: &Poly2, a: &Poly2) -> Poly2 {
    let n = f.truncation();
    let max_j = f.terms().map(|(&(_, j), _)| j).max().unwrap_or(0);
    let pw = powers(a, max_j, n);
    f.terms().fold(Poly2::zero(n), |acc, (&(i, j), c)| {
        acc.add(&Poly2::monomial(i, 0, c.clone(), n).mul(&pw[j as usize]))
    })
}

/// Solves `F(x, a(x)) = 0` for `a = Σ_{k≥2} a_k x^k`, `a_k` up to `k = N − 1`.
fn branch(f: &Poly2) -> Result<Poly2, ComplexError> {
    let n = f.truncation();
    let mut a = Poly2::zero(n - 1).to_complex();
    for k in 2..n {
        // a_k enters the x^{k+1} coefficient only through the xy term.
        let h = substitute_y(f, &a.with_truncation(n));
        a.set_coeff(k, 0, -h.coeff(k + 1, 0));
    }
    let h = substitute_y(f, &a.with_truncation(n));
    if let Some(&(i, _)) = h.terms().map(|(e, _)| e).next() {
        return Err(ComplexError::BranchFailure { degree: i });
    }
    Ok(a)
}

/// `(F(x, y) − F(x, a(x))) / (y − a(x)) = Σ c_ij x^i Σ_l y^l a^{j−1−l}`.
fn divide_by_branch(f: &Poly2, a: &Poly2) -> Poly2 {
    let n = a.truncation();
    let max_j = f.terms().map(|(&(_, j), _)| j).max().unwrap_or(0);
    let pw = powers(a, max_j, n);
    let mut q = Poly2::zero(n).to_complex();
    for (&(i, j), c) in f.terms() {
        if j == 0 || i + j - 1 > n {
            continue;
        }
        let xi = Poly2::monomial(i, 0, c.clone(), n);
        for l in 0..j {
            let term = xi
                .mul(&Poly2::monomial(0, l, Coefficient::one(), n))
                .mul(&pw[(j - 1 - l) as usize]);
            q = q.add(&term);
        }
    }
    q
}

/// Two formal branches of `{F = 0}` and the unit relating them to `F`.
///
/// Requires `F = xy + O(3)`. Output truncations: branches and `f` to
/// `N − 1`, unit to `N − 2`; `f·g` and `branch_f·branch_g·unit` are then
/// determined to `N` and equal `F` there.
pub fn factor_fg(big_f: &Poly2, order: u32) -> Result<FactorPair, ComplexError> {
    let n = order.min(big_f.truncation());
    if n < 3 {
        return Err(ComplexError::TruncationTooLow {
            truncation: n,
            needed: 3,
        });
    }
    let big_f = big_f.truncate(n).to_complex();
    let quadratic_ok = big_f.degree_range(0, 2)
        == Poly2::monomial(1, 1, Coefficient::one(), n).to_complex();
    if !quadratic_ok {
        return Err(ComplexError::NotMorseQuadric);
    }

    let a = branch(&big_f)?;
    let b = swap(&branch(&swap(&big_f))?);
    let branch_f = Poly2::y(n - 1).to_complex().sub(&a);
    let branch_g = Poly2::x(n - 1).to_complex().sub(&b);

    let q = divide_by_branch(&big_f, &a);
    let unit = swap(&divide_by_branch(&swap(&q), &swap(&b).truncate(n - 2)));
    let pair = FactorPair {
        f: branch_f.mul_tight(&unit),
        g: branch_g.clone(),
        branch_f,
        branch_g,
        unit,
        general_position: true,
    };
    let defect = pair.reconstruction().sub(&big_f);
    if let Some(d) = defect.order() {
        return Err(ComplexError::BranchFailure { degree: d });
    }
    debug_assert!(pair.product().sub(&big_f).is_zero());
    Ok(pair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{formal_first_integral_siegel, SiegelForm};
    use crate::series::OneForm2;

    fn poly(n: u32, t: &[(u32, u32, i64)]) -> Poly2 {
        Poly2::from_int_terms(n, t)
    }

    #[test]
    fn plain_xy() {
        let p = factor_fg(&poly(8, &[(1, 1, 1)]), 8).unwrap();
        assert!(p.f.agrees_with(&poly(7, &[(0, 1, 1)])));
        assert!(p.g.agrees_with(&poly(7, &[(1, 0, 1)])));
        assert!(p.unit.agrees_with(&Poly2::one(6)));
        assert!(p.general_position);
    }

    #[test]
    fn product_with_unit() {
        let n = 9;
        let p = factor_fg(&poly(n, &[(1, 1, 1), (3, 2, 1)]), n).unwrap();
        assert!(p.branch_f.agrees_with(&poly(n - 1, &[(0, 1, 1)])));
        assert!(p.branch_g.agrees_with(&poly(n - 1, &[(1, 0, 1)])));
        assert!(p.unit.agrees_with(&poly(n - 2, &[(0, 0, 1), (2, 1, 1)])));
        assert!(p.product().agrees_with(&poly(n, &[(1, 1, 1), (3, 2, 1)])));
    }

    #[test]
    fn cubic_branch() {
        let n = 8;
        let big_f = poly(n, &[(1, 1, 1), (3, 0, 1)]);
        let p = factor_fg(&big_f, n).unwrap();
        // x(y + x²) = F exactly: a(x) = −x², b = 0, unit 1.
        assert!(p.branch_f.agrees_with(&poly(n - 1, &[(0, 1, 1), (2, 0, 1)])));
        assert!(p.reconstruction().agrees_with(&big_f));
    }

    #[test]
    fn mixed_higher_terms() {
        let n = 10;
        let big_f = poly(n, &[(1, 1, 1), (3, 0, 2), (0, 3, -1), (2, 2, 3), (4, 1, 1)]);
        let p = factor_fg(&big_f, n).unwrap();
        assert!(p.reconstruction().agrees_with(&big_f));
        assert!(p.product().agrees_with(&big_f));
        assert_eq!(p.unit.constant_term(), Coefficient::one());
    }

    #[test]
    fn integral_of_siegel_form_factors() {
        let n = 9;
        let form = OneForm2::new(poly(n, &[(0, 1, 1), (2, 0, 1)]), poly(n, &[(1, 0, 1), (0, 2, 1)]));
        let s = SiegelForm::new(form.clone()).unwrap();
        let integral = formal_first_integral_siegel(&s, n).unwrap();
        let pair = factor_fg(&integral.first_integral, n).unwrap();
        assert!(pair.product().agrees_with(&integral.first_integral));
    }

    #[test]
    fn rejects_non_quadric() {
        assert!(matches!(
            factor_fg(&poly(6, &[(2, 0, 1), (0, 2, 1)]), 6),
            Err(ComplexError::NotMorseQuadric)
        ));
        let same = FactorPair::new(poly(6, &[(0, 1, 1)]), poly(6, &[(0, 1, 1)]));
        assert!(!same.general_position);
    }
}
