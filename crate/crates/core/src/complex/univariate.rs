//! Dense univariate polynomials over `Q(i)` and their complex roots.
//!
//! Coefficient vectors are stored lowest degree first. Exact arithmetic is
//! used for everything up to the squarefree decomposition; the roots of each
//! squarefree factor are then found in floating point (closed forms up to
//! degree two, Aberth–Ehrlich iteration beyond).

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::series::Coefficient;

pub type UPoly = Vec<Coefficient>;

/// Drops trailing zero coefficients; the zero polynomial becomes `[]`.
pub fn trim(mut p: UPoly) -> UPoly {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

/// `None` for the zero polynomial.
pub fn degree(p: &[Coefficient]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

pub fn derivative(p: &[Coefficient]) -> UPoly {
    trim(
        p.iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * &Coefficient::from_int(k as i64))
            .collect(),
    )
}

fn sub(p: &[Coefficient], q: &[Coefficient]) -> UPoly {
    let n = p.len().max(q.len());
    trim(
        (0..n)
            .map(|k| {
                let a = p.get(k).cloned().unwrap_or_else(Coefficient::zero);
                let b = q.get(k).cloned().unwrap_or_else(Coefficient::zero);
                &a - &b
            })
            .collect(),
    )
}

/// Quotient and remainder; panics on division by zero.
pub fn div_rem(p: &[Coefficient], d: &[Coefficient]) -> (UPoly, UPoly) {
    let dd = degree(d).expect("division by the zero polynomial");
    let lead_inv = d[dd].inv().expect("nonzero leading coefficient");
    let mut rem = trim(p.to_vec());
    let Some(dp) = degree(&rem) else {
        return (Vec::new(), Vec::new());
    };
    if dp < dd {
        return (Vec::new(), rem);
    }
    let mut quot = vec![Coefficient::zero(); dp - dd + 1];
    while let Some(dr) = degree(&rem) {
        if dr < dd {
            break;
        }
        let c = &rem[dr] * &lead_inv;
        let shift = dr - dd;
        for (k, dk) in d.iter().enumerate().take(dd + 1) {
            rem[shift + k] -= &(&c * dk);
        }
        quot[shift] = c;
        rem = trim(rem);
    }
    (trim(quot), rem)
}

fn monic(p: UPoly) -> UPoly {
    match degree(&p) {
        None => p,
        Some(d) => {
            let inv = p[d].inv().expect("nonzero");
            trim(p.iter().map(|c| c * &inv).collect())
        }
    }
}

/// Monic greatest common divisor; `gcd(0, 0) = 0`.
pub fn gcd(p: &[Coefficient], q: &[Coefficient]) -> UPoly {
    let mut a = trim(p.to_vec());
    let mut b = trim(q.to_vec());
    while degree(&b).is_some() {
        let (_, r) = div_rem(&a, &b);
        a = b;
        b = r;
    }
    monic(a)
}

/// Yun's algorithm: `p = c · Π f_m^m` with each `f_m` squarefree and monic.
/// Returns the nonconstant `(f_m, m)`.
pub fn squarefree_decomposition(p: &[Coefficient]) -> Vec<(UPoly, u32)> {
    let p = trim(p.to_vec());
    if degree(&p).is_none_or(|d| d == 0) {
        return Vec::new();
    }
    let dp = derivative(&p);
    let a0 = gcd(&p, &dp);
    let mut b = div_rem(&p, &a0).0;
    let c = div_rem(&dp, &a0).0;
    let mut d = sub(&c, &derivative(&b));
    let mut out = Vec::new();
    let mut m = 1;
    while degree(&b).is_some_and(|deg| deg > 0) {
        let a = gcd(&b, &d);
        if degree(&a).is_some_and(|deg| deg > 0) {
            out.push((a.clone(), m));
        }
        b = div_rem(&b, &a).0;
        let c = div_rem(&d, &a).0;
        d = sub(&c, &derivative(&b));
        m += 1;
    }
    out
}

pub fn evaluate(p: &[Coefficient], z: Complex64) -> Complex64 {
    p.iter()
        .rev()
        .fold(Complex64::zero(), |acc, c| acc * z + c.to_complex64())
}

fn horner_with_derivative(p: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut v = Complex64::zero();
    let mut dv = Complex64::zero();
    for c in p.iter().rev() {
        dv = dv * z + v;
        v = v * z + c;
    }
    (v, dv)
}

/// All complex roots of a floating-point polynomial (lowest degree first),
/// repeated according to multiplicity. Intended for squarefree input.
pub fn complex_roots(p: &[Complex64]) -> Vec<Complex64> {
    let n = match p.iter().rposition(|c| *c != Complex64::zero()) {
        None | Some(0) => return Vec::new(),
        Some(n) => n,
    };
    let lead = p[n];
    let c: Vec<Complex64> = p[..=n].iter().map(|x| x / lead).collect();
    match n {
        1 => vec![-c[0]],
        2 => {
            // z² + bz + c₀; pick the sign that avoids cancellation.
            let b = c[1];
            let disc = (b * b - 4.0 * c[0]).sqrt();
            let q = if (b.conj() * disc).re >= 0.0 {
                -(b + disc) / 2.0
            } else {
                -(b - disc) / 2.0
            };
            if q == Complex64::zero() {
                vec![Complex64::zero(), Complex64::zero()]
            } else {
                vec![q, c[0] / q]
            }
        }
        _ => aberth(&c, n),
    }
}

fn aberth(c: &[Complex64], n: usize) -> Vec<Complex64> {
    let r0 = if c[0] == Complex64::zero() {
        1.0
    } else {
        c[0].norm().powf(1.0 / n as f64)
    };
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(r0, theta)
        })
        .collect();
    for _ in 0..1000 {
        let mut max_step: f64 = 0.0;
        for k in 0..n {
            let (v, dv) = horner_with_derivative(c, z[k]);
            if v == Complex64::zero() {
                continue;
            }
            let ratio = v / dv;
            let s: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| Complex64::one() / (z[k] - z[j]))
                .sum();
            let w = ratio / (Complex64::one() - ratio * s);
            z[k] -= w;
            max_step = max_step.max(w.norm() / (1.0 + z[k].norm()));
        }
        if max_step <= 1e-15 {
            break;
        }
    }
    z
}

/// A root of an exact polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct Root {
    pub value: Complex64,
    /// Present when the root is rational over `Q(i)` (from a linear factor).
    pub exact: Option<Coefficient>,
    pub multiplicity: u32,
}

/// Roots of an exact polynomial with multiplicities. Zero roots and roots of
/// linear squarefree factors are reported exactly.
pub fn roots(p: &[Coefficient]) -> Vec<Root> {
    let mut out = Vec::new();
    for (factor, m) in squarefree_decomposition(p) {
        let (zeros, rest) = split_zero_root(&factor);
        if zeros > 0 {
            out.push(Root {
                value: Complex64::zero(),
                exact: Some(Coefficient::zero()),
                multiplicity: m,
            });
        }
        match degree(&rest) {
            Some(1) => {
                let r = -&(&rest[0] * &rest[1].inv().expect("nonzero"));
                out.push(Root {
                    value: r.to_complex64(),
                    exact: Some(r),
                    multiplicity: m,
                });
            }
            Some(d) if d > 1 => {
                let fc: Vec<Complex64> = rest.iter().map(Coefficient::to_complex64).collect();
                out.extend(complex_roots(&fc).into_iter().map(|value| Root {
                    value,
                    exact: None,
                    multiplicity: m,
                }));
            }
            _ => {}
        }
    }
    out.sort_by(|a, b| {
        (a.value.re, a.value.im)
            .partial_cmp(&(b.value.re, b.value.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    out
}

fn split_zero_root(p: &[Coefficient]) -> (usize, UPoly) {
    let z = p.iter().take_while(|c| c.is_zero()).count();
    (z, p[z..].to_vec())
}
