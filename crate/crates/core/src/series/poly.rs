//! Truncated bivariate power series over `Q(i)`.
//!
//! A [`Poly2`] stands for `Σ c_ij x^i y^j + O(deg N+1)`: the coefficients of
//! total degree `≤ N` are known exactly and everything above is unknown.
//! Only nonzero coefficients are stored.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Zero};

use super::coefficient::Coefficient;
use super::SeriesError;

pub type Exponent = (u32, u32);

/// 2×2 matrix of exact scalars, row-major.
pub type Matrix2 = [[Coefficient; 2]; 2];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly2 {
    truncation: u32,
    terms: BTreeMap<Exponent, Coefficient>,
    real: bool,
}

impl Poly2 {
    pub fn zero(truncation: u32) -> Self {
        Self {
            truncation,
            terms: BTreeMap::new(),
            real: true,
        }
    }

    pub fn constant(c: Coefficient, truncation: u32) -> Self {
        Self::monomial(0, 0, c, truncation)
    }

    pub fn one(truncation: u32) -> Self {
        Self::constant(Coefficient::one(), truncation)
    }

    pub fn monomial(i: u32, j: u32, c: Coefficient, truncation: u32) -> Self {
        let real = c.is_real();
        let mut terms = BTreeMap::new();
        if i + j <= truncation && !c.is_zero() {
            terms.insert((i, j), c);
        }
        Self {
            truncation,
            terms,
            real,
        }
    }

    pub fn x(truncation: u32) -> Self {
        Self::monomial(1, 0, Coefficient::one(), truncation)
    }

    pub fn y(truncation: u32) -> Self {
        Self::monomial(0, 1, Coefficient::one(), truncation)
    }

    /// Builds a series from `(i, j, c)` triples. Repeated exponents add up,
    /// terms above the truncation are dropped, and the reality flag is set
    /// when every coefficient is real.
    pub fn from_terms<I>(truncation: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (u32, u32, Coefficient)>,
    {
        let mut map: BTreeMap<Exponent, Coefficient> = BTreeMap::new();
        for (i, j, c) in terms {
            if i + j > truncation {
                continue;
            }
            *map.entry((i, j)).or_insert_with(Coefficient::zero) += &c;
        }
        map.retain(|_, c| !c.is_zero());
        let real = map.values().all(Coefficient::is_real);
        Self {
            truncation,
            terms: map,
            real,
        }
    }

    /// Integer-coefficient shorthand, mostly for fixtures and tests.
    pub fn from_int_terms(truncation: u32, terms: &[(u32, u32, i64)]) -> Self {
        Self::from_terms(
            truncation,
            terms.iter().map(|&(i, j, c)| (i, j, Coefficient::from_int(c))),
        )
    }

    /// Like [`Poly2::from_terms`] but rejects out-of-range exponents instead of
    /// truncating them.
    pub fn try_from_terms<I>(truncation: u32, terms: I) -> Result<Self, SeriesError>
    where
        I: IntoIterator<Item = (u32, u32, Coefficient)>,
    {
        let collected: Vec<_> = terms.into_iter().collect();
        if let Some(&(i, j, _)) = collected.iter().find(|(i, j, _)| i + j > truncation) {
            return Err(SeriesError::ExponentOutOfRange { i, j, truncation });
        }
        Ok(Self::from_terms(truncation, collected))
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Coefficient)> {
        self.terms.iter()
    }

    pub fn coeff(&self, i: u32, j: u32) -> Coefficient {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(Coefficient::zero)
    }

    pub fn set_coeff(&mut self, i: u32, j: u32, c: Coefficient) {
        if i + j > self.truncation {
            return;
        }
        if !c.is_real() {
            self.real = false;
        }
        if c.is_zero() {
            self.terms.remove(&(i, j));
        } else {
            self.terms.insert((i, j), c);
        }
    }

    pub fn constant_term(&self) -> Coefficient {
        self.coeff(0, 0)
    }

    /// Lowest total degree carrying a nonzero coefficient.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, j)| i + j).min()
    }

    /// Lowest degree that may be nonzero: `order()`, or `N + 1` for a
    /// series that is zero to truncation.
    pub fn valuation(&self) -> u32 {
        self.order().unwrap_or(self.truncation + 1)
    }

    pub fn homogeneous_part(&self, k: u32) -> Poly2 {
        self.filter(|i, j| i + j == k)
    }

    /// Terms of total degree in `lo..=hi`.
    pub fn degree_range(&self, lo: u32, hi: u32) -> Poly2 {
        self.filter(|i, j| i + j >= lo && i + j <= hi)
    }

    fn filter(&self, keep: impl Fn(u32, u32) -> bool) -> Poly2 {
        Poly2 {
            truncation: self.truncation,
            terms: self
                .terms
                .iter()
                .filter(|(&(i, j), _)| keep(i, j))
                .map(|(&e, c)| (e, c.clone()))
                .collect(),
            real: self.real,
        }
    }

    /// Forget everything above degree `n` (no-op when `n ≥ N`).
    pub fn truncate(&self, n: u32) -> Poly2 {
        if n >= self.truncation {
            return self.clone();
        }
        let mut out = self.filter(|i, j| i + j <= n);
        out.truncation = n;
        out
    }

    /// Reinterpret an exact polynomial at a higher truncation. Only valid when
    /// the caller knows the series has no terms between the old and new degree.
    pub fn with_truncation(&self, n: u32) -> Poly2 {
        if n <= self.truncation {
            return self.truncate(n);
        }
        Poly2 {
            truncation: n,
            terms: self.terms.clone(),
            real: self.real,
        }
    }

    /// Same coefficients, flagged complex.
    pub fn to_complex(&self) -> Poly2 {
        let mut out = self.clone();
        out.real = false;
        out
    }

    /// Flagged real again if every coefficient is real.
    pub fn to_real(&self) -> Option<Poly2> {
        if self.terms.values().all(Coefficient::is_real) {
            let mut out = self.clone();
            out.real = true;
            Some(out)
        } else {
            None
        }
    }

    pub fn conj(&self) -> Poly2 {
        Poly2 {
            truncation: self.truncation,
            terms: self.terms.iter().map(|(&e, c)| (e, c.conj())).collect(),
            real: self.real,
        }
    }

    pub fn add(&self, other: &Poly2) -> Poly2 {
        let n = self.truncation.min(other.truncation);
        let mut terms: BTreeMap<Exponent, Coefficient> = self
            .terms
            .iter()
            .filter(|(&(i, j), _)| i + j <= n)
            .map(|(&e, c)| (e, c.clone()))
            .collect();
        for (&(i, j), c) in &other.terms {
            if i + j > n {
                continue;
            }
            let entry = terms.entry((i, j)).or_insert_with(Coefficient::zero);
            *entry += c;
            if entry.is_zero() {
                terms.remove(&(i, j));
            }
        }
        Poly2 {
            truncation: n,
            terms,
            real: self.real && other.real,
        }
    }

    pub fn neg(&self) -> Poly2 {
        Poly2 {
            truncation: self.truncation,
            terms: self.terms.iter().map(|(&e, c)| (e, -c)).collect(),
            real: self.real,
        }
    }

    pub fn sub(&self, other: &Poly2) -> Poly2 {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &Coefficient) -> Poly2 {
        if s.is_zero() {
            return Poly2 {
                truncation: self.truncation,
                terms: BTreeMap::new(),
                real: self.real && s.is_real(),
            };
        }
        Poly2 {
            truncation: self.truncation,
            terms: self.terms.iter().map(|(&e, c)| (e, c * s)).collect(),
            real: self.real && s.is_real(),
        }
    }

    /// Truncated Cauchy product at degree `min(N_u, N_v)`.
    pub fn mul(&self, other: &Poly2) -> Poly2 {
        self.mul_to(other, self.truncation.min(other.truncation))
    }

    /// Cauchy product carrying every degree that is actually determined by
    /// the operands: `min(N_u + val v, N_v + val u)`. A factor with zero
    /// constant term therefore does not cost the other factor any precision.
    pub fn mul_tight(&self, other: &Poly2) -> Poly2 {
        let n = (self.truncation + other.valuation()).min(other.truncation + self.valuation());
        self.mul_to(other, n)
    }

    fn mul_to(&self, other: &Poly2, n: u32) -> Poly2 {
        let mut terms: BTreeMap<Exponent, Coefficient> = BTreeMap::new();
        for (&(i1, j1), c1) in &self.terms {
            if i1 + j1 > n {
                continue;
            }
            for (&(i2, j2), c2) in &other.terms {
                if i1 + j1 + i2 + j2 > n {
                    continue;
                }
                let entry = terms
                    .entry((i1 + i2, j1 + j2))
                    .or_insert_with(Coefficient::zero);
                *entry += &(c1 * c2);
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Poly2 {
            truncation: n,
            terms,
            real: self.real && other.real,
        }
    }

    pub fn pow(&self, k: u32) -> Poly2 {
        let mut acc = Poly2::one(self.truncation);
        acc.real = self.real;
        for _ in 0..k {
            acc = acc.mul_tight(self);
            acc = acc.truncate(self.truncation);
        }
        acc
    }

    /// `∂/∂x`, known to degree `N − 1`.
    pub fn partial_x(&self) -> Poly2 {
        self.partial(true)
    }

    /// `∂/∂y`, known to degree `N − 1`.
    pub fn partial_y(&self) -> Poly2 {
        self.partial(false)
    }

    fn partial(&self, wrt_x: bool) -> Poly2 {
        let n = self.truncation.saturating_sub(1);
        let terms = self
            .terms
            .iter()
            .filter_map(|(&(i, j), c)| {
                let (p, e) = if wrt_x {
                    (i, (i.checked_sub(1)?, j))
                } else {
                    (j, (i, j.checked_sub(1)?))
                };
                Some((e, c * &Coefficient::from_int(p as i64)))
            })
            .filter(|((i, j), _)| i + j <= n)
            .collect();
        Poly2 {
            truncation: n,
            terms,
            real: self.real,
        }
    }

    /// `f(m·(x, y))`: substitutes `x ↦ m₀₀x + m₀₁y`, `y ↦ m₁₀x + m₁₁y`.
    pub fn linear_change(&self, m: &Matrix2) -> Result<Poly2, SeriesError> {
        let det = &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]);
        if det.is_zero() {
            return Err(SeriesError::SingularMatrix);
        }
        let n = self.truncation;
        let real = self.real && m.iter().flatten().all(Coefficient::is_real);
        let new_x = Poly2::from_terms(n, [(1, 0, m[0][0].clone()), (0, 1, m[0][1].clone())]);
        let new_y = Poly2::from_terms(n, [(1, 0, m[1][0].clone()), (0, 1, m[1][1].clone())]);
        let max_i = self.terms.keys().map(|e| e.0).max().unwrap_or(0);
        let max_j = self.terms.keys().map(|e| e.1).max().unwrap_or(0);
        let powers = |base: &Poly2, k: u32| {
            let mut out = vec![Poly2::one(n)];
            for _ in 0..k {
                let next = out.last().unwrap().mul(base);
                out.push(next);
            }
            out
        };
        let xp = powers(&new_x, max_i);
        let yp = powers(&new_y, max_j);
        let mut acc = Poly2::zero(n);
        for (&(i, j), c) in &self.terms {
            let term = xp[i as usize].mul(&yp[j as usize]).scale(c);
            acc = acc.add(&term);
        }
        acc.real = real;
        Ok(acc)
    }

    /// Evaluates the truncated polynomial at a complex point, Horner in `y`
    /// nested inside Horner in `x`.
    pub fn evaluate(&self, point: (Complex64, Complex64)) -> Complex64 {
        let (x, y) = point;
        let max_i = match self.terms.keys().map(|e| e.0).max() {
            Some(m) => m,
            None => return Complex64::new(0.0, 0.0),
        };
        let mut rows: Vec<Vec<(u32, Complex64)>> = vec![Vec::new(); max_i as usize + 1];
        for (&(i, j), c) in &self.terms {
            rows[i as usize].push((j, c.to_complex64()));
        }
        let horner_y = |row: &[(u32, Complex64)]| {
            let max_j = row.iter().map(|t| t.0).max().unwrap_or(0);
            let mut dense = vec![Complex64::new(0.0, 0.0); max_j as usize + 1];
            for &(j, c) in row {
                dense[j as usize] = c;
            }
            dense
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * y + c)
        };
        rows.iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, row| acc * x + horner_y(row))
    }

    /// True if the two series agree on every degree both of them know.
    pub fn agrees_with(&self, other: &Poly2) -> bool {
        self.sub(other).is_zero()
    }
}

impl fmt::Display for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        }
        for (k, (&(i, j), c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            if i > 0 {
                write!(f, "·x^{i}")?;
            }
            if j > 0 {
                write!(f, "·y^{j}")?;
            }
        }
        write!(f, " + O({})", self.truncation + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: i64) -> Coefficient {
        Coefficient::from_int(n)
    }

    #[test]
    fn difference_of_squares() {
        let a = Poly2::from_int_terms(6, &[(1, 0, 1), (0, 1, 1)]);
        let b = Poly2::from_int_terms(6, &[(1, 0, 1), (0, 1, -1)]);
        assert_eq!(a.mul(&b), Poly2::from_int_terms(6, &[(2, 0, 1), (0, 2, -1)]));
    }

    #[test]
    fn geometric_series_inverse() {
        let one_plus_x = Poly2::from_int_terms(5, &[(0, 0, 1), (1, 0, 1)]);
        let geom = Poly2::from_int_terms(
            5,
            &[(0, 0, 1), (1, 0, -1), (2, 0, 1), (3, 0, -1), (4, 0, 1), (5, 0, -1)],
        );
        assert_eq!(one_plus_x.mul(&geom), Poly2::one(5));
    }

    #[test]
    fn square_of_radius_squared() {
        let r2 = Poly2::from_int_terms(8, &[(2, 0, 1), (0, 2, 1)]);
        let expected = Poly2::from_int_terms(8, &[(4, 0, 1), (2, 2, 2), (0, 4, 1)]);
        assert_eq!(r2.mul(&r2), expected);
        assert_eq!(r2.pow(2), expected);
    }

    #[test]
    fn truncation_is_min_of_operands() {
        let a = Poly2::from_int_terms(3, &[(1, 0, 1)]);
        let b = Poly2::from_int_terms(7, &[(3, 0, 1)]);
        let p = a.mul(&b);
        assert_eq!(p.truncation(), 3);
        assert!(p.is_zero());
        assert_eq!(a.mul_tight(&b).truncation(), 6);
        assert_eq!(a.mul_tight(&b).coeff(4, 0), c(1));
    }

    #[test]
    fn linear_change_examples() {
        let id: Matrix2 = [[c(1), c(0)], [c(0), c(1)]];
        let xy = Poly2::from_int_terms(4, &[(1, 1, 1)]);
        assert_eq!(xy.linear_change(&id).unwrap(), xy);

        let swap: Matrix2 = [[c(0), c(1)], [c(1), c(0)]];
        assert_eq!(Poly2::x(4).linear_change(&swap).unwrap(), Poly2::y(4));

        // x ↦ x + y, y ↦ i x − i y sends x² + y² to 4xy.
        let i = Coefficient::i();
        let m: Matrix2 = [[c(1), c(1)], [i.clone(), -&i]];
        let r2 = Poly2::from_int_terms(4, &[(2, 0, 1), (0, 2, 1)]);
        let image = r2.linear_change(&m).unwrap();
        assert_eq!(image, Poly2::from_int_terms(4, &[(1, 1, 4)]).to_complex());
        assert!(!image.is_real());

        let singular: Matrix2 = [[c(1), c(2)], [c(2), c(4)]];
        assert_eq!(r2.linear_change(&singular), Err(SeriesError::SingularMatrix));
    }

    #[test]
    fn evaluate_examples() {
        let r2 = Poly2::from_int_terms(4, &[(2, 0, 1), (0, 2, 1)]);
        let v = r2.evaluate((Complex64::new(3.0, 0.0), Complex64::new(4.0, 0.0)));
        assert!((v - Complex64::new(25.0, 0.0)).norm() < 1e-12);

        let xy = Poly2::from_int_terms(4, &[(1, 1, 1)]);
        let v = xy.evaluate((Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)));
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);

        let cusp = Poly2::from_int_terms(4, &[(2, 0, 1), (0, 3, -1)]);
        let v = cusp.evaluate((Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)));
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn partials_drop_one_degree() {
        let f = Poly2::from_int_terms(4, &[(2, 2, 1), (4, 0, 3), (1, 0, 5)]);
        let fx = f.partial_x();
        assert_eq!(fx.truncation(), 3);
        assert_eq!(fx, Poly2::from_int_terms(3, &[(1, 2, 2), (3, 0, 12), (0, 0, 5)]));
        assert_eq!(f.partial_y(), Poly2::from_int_terms(3, &[(2, 1, 2)]));
    }

    #[test]
    fn rejects_out_of_range_exponents() {
        let err = Poly2::try_from_terms(3, [(2, 2, c(1))]).unwrap_err();
        assert!(matches!(err, SeriesError::ExponentOutOfRange { .. }));
    }
}
