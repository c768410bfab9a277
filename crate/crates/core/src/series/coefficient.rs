//! Exact Gaussian-rational scalars.
//!
//! Every symbolic object in the crate (series, fields, 1-forms, germs) is
//! built on [`Coefficient`]: a pair of arbitrary-precision rationals
//! `re + im·i`. Real inputs simply carry a zero imaginary part.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// An exact element of `Q(i)`.
///
/// Both parts are `BigRational`, which keeps fractions in lowest terms with a
/// strictly positive denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Coefficient {
    re: BigRational,
    im: BigRational,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("cannot parse coefficient `{input}`: {reason}")]
pub struct ParseCoefficientError {
    pub input: String,
    pub reason: String,
}

impl Coefficient {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        Self {
            re,
            im: BigRational::zero(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::real(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num/den` as a real coefficient. Panics on a zero denominator.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::real(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn gaussian(re_num: i64, re_den: i64, im_num: i64, im_den: i64) -> Self {
        assert!(re_den != 0 && im_den != 0, "zero denominator");
        Self {
            re: BigRational::new(BigInt::from(re_num), BigInt::from(re_den)),
            im: BigRational::new(BigInt::from(im_num), BigInt::from(im_den)),
        }
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Self {
            re: BigRational::zero(),
            im: BigRational::one(),
        }
    }

    pub fn re(&self) -> &BigRational {
        &self.re
    }

    pub fn im(&self) -> &BigRational {
        &self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    /// `|z|²`, always a nonnegative rational.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(Self {
            re: &self.re / &n,
            im: -(&self.im / &n),
        })
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Sign of a real coefficient (`-1`, `0`, `1`); `None` if complex.
    pub fn real_sign(&self) -> Option<i8> {
        if !self.is_real() {
            return None;
        }
        Some(if self.re.is_zero() {
            0
        } else if self.re.is_positive() {
            1
        } else {
            -1
        })
    }

    /// Rounded to binary64 at the last moment.
    pub fn to_complex64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    pub fn to_f64_re(&self) -> f64 {
        self.re.to_f64().unwrap_or(f64::NAN)
    }
}

impl Zero for Coefficient {
    fn zero() -> Self {
        Self {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for Coefficient {
    fn one() -> Self {
        Self::real(BigRational::one())
    }
}

impl From<i64> for Coefficient {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl From<BigRational> for Coefficient {
    fn from(q: BigRational) -> Self {
        Self::real(q)
    }
}

impl<'a> Add<&'a Coefficient> for &'a Coefficient {
    type Output = Coefficient;
    fn add(self, rhs: &'a Coefficient) -> Coefficient {
        Coefficient {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl<'a> Sub<&'a Coefficient> for &'a Coefficient {
    type Output = Coefficient;
    fn sub(self, rhs: &'a Coefficient) -> Coefficient {
        Coefficient {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl<'a> Mul<&'a Coefficient> for &'a Coefficient {
    type Output = Coefficient;
    fn mul(self, rhs: &'a Coefficient) -> Coefficient {
        if self.is_real() && rhs.is_real() {
            return Coefficient::real(&self.re * &rhs.re);
        }
        Coefficient {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl<'a> Div<&'a Coefficient> for &'a Coefficient {
    type Output = Coefficient;
    fn div(self, rhs: &'a Coefficient) -> Coefficient {
        let inv = rhs.inv().expect("division by zero coefficient");
        self * &inv
    }
}

impl Neg for &Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Coefficient {
        Coefficient {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr<Coefficient> for Coefficient {
            type Output = Coefficient;
            fn $method(self, rhs: Coefficient) -> Coefficient {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a Coefficient> for Coefficient {
            type Output = Coefficient;
            fn $method(self, rhs: &'a Coefficient) -> Coefficient {
                (&self).$method(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Coefficient {
        Coefficient {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl<'a> AddAssign<&'a Coefficient> for Coefficient {
    fn add_assign(&mut self, rhs: &'a Coefficient) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl<'a> SubAssign<&'a Coefficient> for Coefficient {
    fn sub_assign(&mut self, rhs: &'a Coefficient) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl<'a> MulAssign<&'a Coefficient> for Coefficient {
    fn mul_assign(&mut self, rhs: &'a Coefficient) {
        *self = &*self * rhs;
    }
}

fn fmt_rational(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Canonical text form: `num/den` for real values, `re_num/re_den+im_num/im_den i`
/// (or `-` before the imaginary part) otherwise.
impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_real() {
            return write!(f, "{}", fmt_rational(&self.re));
        }
        let sign = if self.im.is_negative() { '-' } else { '+' };
        write!(
            f,
            "{}{}{} i",
            fmt_rational(&self.re),
            sign,
            fmt_rational(&self.im.abs())
        )
    }
}

fn parse_rational(s: &str, whole: &str) -> Result<BigRational, ParseCoefficientError> {
    let err = |reason: &str| ParseCoefficientError {
        input: whole.to_string(),
        reason: reason.to_string(),
    };
    let s = s.trim();
    if s.is_empty() {
        return Err(err("empty rational"));
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| err("bad numerator"))?;
    let den: BigInt = den.parse().map_err(|_| err("bad denominator"))?;
    if den.is_zero() {
        return Err(err("zero denominator"));
    }
    Ok(BigRational::new(num, den))
}

/// Accepts `a`, `a/b`, `a/b i`, and `a/b+c/d i` / `a/b-c/d i`.
impl FromStr for Coefficient {
    type Err = ParseCoefficientError;

    fn from_str(input: &str) -> Result<Self, Self::Err> {
        let s = input.trim();
        let Some(body) = s.strip_suffix('i') else {
            return Ok(Coefficient::real(parse_rational(s, input)?));
        };
        let body = body.trim_end();
        // Split at the last sign that is not the leading one.
        let split = body
            .char_indices()
            .skip(1)
            .filter(|&(_, c)| c == '+' || c == '-')
            .map(|(k, _)| k)
            .last();
        match split {
            Some(k) => {
                let re = parse_rational(&body[..k], input)?;
                let im_text = &body[k..];
                let (neg, rest) = match im_text.split_at(1) {
                    ("-", r) => (true, r),
                    (_, r) => (false, r),
                };
                let rest = rest.trim();
                let im = if rest.is_empty() {
                    BigRational::one()
                } else {
                    parse_rational(rest, input)?
                };
                Ok(Coefficient::new(re, if neg { -im } else { im }))
            }
            None => {
                let t = body.trim();
                let im = match t {
                    "" | "+" => BigRational::one(),
                    "-" => -BigRational::one(),
                    _ => parse_rational(t, input)?,
                };
                Ok(Coefficient::new(BigRational::zero(), im))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_terms_and_positive_denominator() {
        let c = Coefficient::ratio(4, -6);
        assert_eq!(c.re().numer(), &BigInt::from(-2));
        assert_eq!(c.re().denom(), &BigInt::from(3));
    }

    #[test]
    fn field_operations() {
        let a = Coefficient::gaussian(1, 2, 3, 1);
        let b = Coefficient::gaussian(-2, 1, 1, 5);
        let q = &a / &b;
        assert_eq!(&q * &b, a);
        assert_eq!(Coefficient::i().pow(4), Coefficient::one());
        assert_eq!(Coefficient::i() * Coefficient::i(), Coefficient::from_int(-1));
    }

    #[test]
    fn parse_and_display() {
        for text in ["3/4", "-1/2+5/7 i", "0/1+1/1 i", "2/3-1/9 i"] {
            let c: Coefficient = text.parse().unwrap();
            let again: Coefficient = c.to_string().parse().unwrap();
            assert_eq!(c, again);
        }
        assert_eq!("1/2-3/4 i".parse::<Coefficient>().unwrap(), Coefficient::gaussian(1, 2, -3, 4));
        assert_eq!("i".parse::<Coefficient>().unwrap(), Coefficient::i());
        assert_eq!("-2 i".parse::<Coefficient>().unwrap(), Coefficient::gaussian(0, 1, -2, 1));
        assert_eq!("-5".parse::<Coefficient>().unwrap(), Coefficient::from_int(-5));
        assert!("1/0".parse::<Coefficient>().is_err());
        assert!("x".parse::<Coefficient>().is_err());
    }

    #[test]
    fn canonical_text() {
        assert_eq!(Coefficient::ratio(-3, 6).to_string(), "-1/2");
        assert_eq!(Coefficient::gaussian(0, 1, -1, 1).to_string(), "0/1-1/1 i");
    }
}
