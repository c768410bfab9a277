//! Numeric samples of the real surface `V² = {f = conj(g)}` and the contact
//! order of the foliation with it.
//!
//! `V²` is cut out by two real equations `Re f = Re g`, `Im f = −Im g` in
//! `C² ≅ R⁴`. Each seed fixes `x` and refines `y` by damped Newton on
//! `h(y) = f(x, y) − conj(g(x, y))`, starting from `y = conj(x)`, which is
//! exact for `f = y`, `g = x`.

use num_complex::Complex64;

use super::{ComplexError, FactorPair};
use crate::series::{OneForm2, Poly2};

/// Seed grid and refinement tolerances.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceGrid {
    pub radii: Vec<f64>,
    pub angles: usize,
    pub step_tol: f64,
    pub residual_tol: f64,
    /// Bound on `|Re f − Re g|`, `|Im f + Im g|`, `|Im fg|` and `−Re fg`.
    pub sample_tol: f64,
    pub max_iter: usize,
}

impl Default for SliceGrid {
    fn default() -> Self {
        Self {
            radii: vec![0.02, 0.04, 0.06, 0.08, 0.1],
            angles: 12,
            step_tol: 1e-12,
            residual_tol: 1e-10,
            sample_tol: 1e-9,
            max_iter: 50,
        }
    }
}

impl SliceGrid {
    pub fn with_radii(radii: Vec<f64>) -> Self {
        Self {
            radii,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), ComplexError> {
        if self.radii.is_empty() {
            return Err(ComplexError::InvalidGrid("no radii".into()));
        }
        if self.radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(ComplexError::InvalidGrid("radii must be positive and finite".into()));
        }
        if self.angles == 0 {
            return Err(ComplexError::InvalidGrid("at least one angle required".into()));
        }
        let tols = [self.step_tol, self.residual_tol, self.sample_tol];
        if tols.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(ComplexError::InvalidGrid("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlicePoint {
    pub x: Complex64,
    pub y: Complex64,
    pub f: Complex64,
    pub g: Complex64,
    pub fg: Complex64,
    pub contact_order: u8,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SliceVerification {
    pub max_abs_imag_fg: f64,
    pub min_real_fg: f64,
    /// Every sample has contact order one.
    pub contact_order_one: bool,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RealSlice {
    pub samples: Vec<SlicePoint>,
    pub tol: f64,
    pub seeds: usize,
    /// Seeds whose refinement did not converge.
    pub failures: usize,
    pub verification: SliceVerification,
}

struct Derivatives {
    f: Poly2,
    g: Poly2,
    fx: Poly2,
    fy: Poly2,
    gx: Poly2,
    gy: Poly2,
}

impl Derivatives {
    fn new(pair: &FactorPair) -> Self {
        Self {
            fx: pair.f.partial_x(),
            fy: pair.f.partial_y(),
            gx: pair.g.partial_x(),
            gy: pair.g.partial_y(),
            f: pair.f.clone(),
            g: pair.g.clone(),
        }
    }

    fn h(&self, p: (Complex64, Complex64)) -> Complex64 {
        self.f.evaluate(p) - self.g.evaluate(p).conj()
    }
}

/// Orthonormal basis of the kernel of the real `2×4` Jacobian of
/// `(Re h, Im h)` in coordinates `(Re x, Im x, Re y, Im y)`.
fn tangent_plane(d: &Derivatives, p: (Complex64, Complex64)) -> [[f64; 4]; 2] {
    let i = Complex64::i();
    let (fx, fy) = (d.fx.evaluate(p), d.fy.evaluate(p));
    let (gx, gy) = (d.gx.evaluate(p), d.gy.evaluate(p));
    let cols = [
        fx - gx.conj(),
        i * fx + i * gx.conj(),
        fy - gy.conj(),
        i * fy + i * gy.conj(),
    ];
    let rows = [cols.map(|c| c.re), cols.map(|c| c.im)];
    null_space_2x4(&rows)
}

fn dot(u: &[f64; 4], v: &[f64; 4]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn project_out(v: &mut [f64; 4], basis: &[[f64; 4]]) {
    for b in basis {
        let c = dot(v, b);
        for k in 0..4 {
            v[k] -= c * b[k];
        }
    }
}

fn normalized(v: [f64; 4]) -> Option<[f64; 4]> {
    let n = dot(&v, &v).sqrt();
    (n > 1e-300).then(|| v.map(|x| x / n))
}

fn null_space_2x4(rows: &[[f64; 4]; 2]) -> [[f64; 4]; 2] {
    let mut span: Vec<[f64; 4]> = Vec::new();
    for r in rows {
        let mut v = *r;
        project_out(&mut v, &span);
        if let Some(u) = normalized(v) {
            span.push(u);
        }
    }
    let mut kernel: Vec<[f64; 4]> = Vec::new();
    while kernel.len() < 2 {
        let all: Vec<[f64; 4]> = span.iter().chain(&kernel).copied().collect();
        let best = (0..4)
            .map(|k| {
                let mut e = [0.0; 4];
                e[k] = 1.0;
                project_out(&mut e, &all);
                e
            })
            .max_by(|a, b| dot(a, a).total_cmp(&dot(b, b)))
            .expect("four candidates");
        match normalized(best) {
            Some(u) => kernel.push(u),
            None => break,
        }
    }
    [kernel[0], kernel.get(1).copied().unwrap_or([0.0; 4])]
}

/// Approximate tangent plane of `V²` for the pair at a point.
pub fn slice_tangent_basis(pair: &FactorPair, point: (Complex64, Complex64)) -> [[f64; 4]; 2] {
    tangent_plane(&Derivatives::new(pair), point)
}

/// Numeric rank with full pivoting; rows are normalized first.
fn rank(mut m: Vec<[f64; 4]>, tol: f64) -> usize {
    for row in &mut m {
        if let Some(u) = normalized(*row) {
            *row = u;
        }
    }
    let mut r = 0;
    let mut cols: Vec<usize> = (0..4).collect();
    while r < m.len() && r < 4 {
        let mut best = (0.0, r, r);
        for (ri, row) in m.iter().enumerate().skip(r) {
            for (ci, &c) in cols.iter().enumerate().skip(r) {
                if row[c].abs() > best.0 {
                    best = (row[c].abs(), ri, ci);
                }
            }
        }
        if best.0 <= tol {
            break;
        }
        m.swap(r, best.1);
        cols.swap(r, best.2);
        let pc = cols[r];
        let pivot = m[r];
        for row in m.iter_mut().skip(r + 1) {
            let factor = row[pc] / pivot[pc];
            for k in 0..4 {
                row[k] -= factor * pivot[k];
            }
        }
        r += 1;
    }
    r
}

/// Real dimension of `T_p F ∩ T_p V`, where `T_p F` is the complex kernel
/// line of the form at `p` and `T_p V` is spanned by `tangent_basis` in
/// `(Re x, Im x, Re y, Im y)` coordinates.
pub fn contact_order(
    form: &OneForm2,
    point: (Complex64, Complex64),
    tangent_basis: &[[f64; 4]; 2],
) -> Result<u8, ComplexError> {
    let (a, b) = form.evaluate(point);
    contact_order_of_covector(a, b, tangent_basis)
}

/// [`contact_order`] for the covector `a dx + b dy` already evaluated.
fn contact_order_of_covector(
    a: Complex64,
    b: Complex64,
    tangent_basis: &[[f64; 4]; 2],
) -> Result<u8, ComplexError> {
    if a.norm() <= 1e-14 && b.norm() <= 1e-14 {
        return Err(ComplexError::SingularPoint);
    }
    // kernel direction v = (b, −a) and iv
    let v = [b.re, b.im, -a.re, -a.im];
    let iv = [-b.im, b.re, a.im, -a.re];
    let r = rank(vec![v, iv, tangent_basis[0], tangent_basis[1]], 1e-8);
    Ok((4 - r).min(2) as u8)
}

/// Damped Newton on `y` with `x` fixed; `None` if it fails to converge.
fn refine(d: &Derivatives, x: Complex64, grid: &SliceGrid) -> Option<Complex64> {
    let mut y = x.conj();
    let mut res = d.h((x, y)).norm();
    for _ in 0..grid.max_iter {
        if res <= grid.residual_tol {
            return Some(y);
        }
        let p = (x, y);
        let h = d.h(p);
        let (fy, gy) = (d.fy.evaluate(p), d.gy.evaluate(p));
        // δh = f_y δy − conj(g_y) conj(δy) as a real 2×2 system
        let j = [[fy.re - gy.re, -fy.im + gy.im], [fy.im + gy.im, fy.re + gy.re]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 {
            return None;
        }
        let dr = (-h.re * j[1][1] + h.im * j[0][1]) / det;
        let di = (-h.im * j[0][0] + h.re * j[1][0]) / det;
        let step = Complex64::new(dr, di);
        let mut lambda = 1.0;
        loop {
            let trial = y + step * lambda;
            let r = d.h((x, trial)).norm();
            if r < res || lambda < 1.0 / 1024.0 {
                y = trial;
                res = r;
                break;
            }
            lambda /= 2.0;
        }
        if (step * lambda).norm() <= grid.step_tol * (1.0 + y.norm()) {
            break;
        }
    }
    (res <= grid.residual_tol).then_some(y)
}

/// Samples `V²` from a polar grid of seeds and verifies `f·g ≥ 0` and
/// contact order one at every sample.
pub fn real_slice(pair: &FactorPair, grid: &SliceGrid) -> Result<RealSlice, ComplexError> {
    if !pair.general_position {
        return Err(ComplexError::NotGeneralPosition);
    }
    grid.validate()?;
    let d = Derivatives::new(pair);
    let tol = grid.sample_tol;
    let mut samples = Vec::new();
    let mut seeds = 0;
    let mut failures = 0;
    for &r in &grid.radii {
        for k in 0..grid.angles {
            seeds += 1;
            let theta = std::f64::consts::TAU * k as f64 / grid.angles as f64;
            let x = Complex64::from_polar(r, theta);
            let Some(y) = refine(&d, x, grid) else {
                failures += 1;
                continue;
            };
            let p = (x, y);
            let (f, g) = (d.f.evaluate(p), d.g.evaluate(p));
            if (f.re - g.re).abs() > tol || (f.im + g.im).abs() > tol {
                failures += 1;
                continue;
            }
            let basis = tangent_plane(&d, p);
            // d(f·g) of the stored polynomials, not of the truncated product
            let (a, b) = (
                d.fx.evaluate(p) * g + f * d.gx.evaluate(p),
                d.fy.evaluate(p) * g + f * d.gy.evaluate(p),
            );
            let Ok(order) = contact_order_of_covector(a, b, &basis) else {
                failures += 1;
                continue;
            };
            samples.push(SlicePoint {
                x,
                y,
                f,
                g,
                fg: f * g,
                contact_order: order,
            });
        }
    }
    if samples.is_empty() {
        return Err(ComplexError::NoSamples);
    }
    let max_abs_imag_fg = samples.iter().map(|s| s.fg.im.abs()).fold(0.0, f64::max);
    let min_real_fg = samples.iter().map(|s| s.fg.re).fold(f64::INFINITY, f64::min);
    let contact_order_one = samples.iter().all(|s| s.contact_order == 1);
    let passed = max_abs_imag_fg <= tol && min_real_fg >= -tol && contact_order_one;
    Ok(RealSlice {
        samples,
        tol,
        seeds,
        failures,
        verification: SliceVerification {
            max_abs_imag_fg,
            min_real_fg,
            contact_order_one,
            passed,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::factor_fg;

    fn poly(n: u32, t: &[(u32, u32, i64)]) -> Poly2 {
        Poly2::from_int_terms(n, t)
    }

    #[test]
    fn trivial_pair_slice_is_conjugate_graph() {
        let pair = FactorPair::new(poly(6, &[(0, 1, 1)]), poly(6, &[(1, 0, 1)]));
        let s = real_slice(&pair, &SliceGrid::default()).unwrap();
        assert_eq!(s.samples.len(), 60);
        for p in &s.samples {
            assert!((p.y - p.x.conj()).norm() < 1e-15);
            assert!((p.fg - Complex64::new(p.x.norm_sqr(), 0.0)).norm() < 1e-15);
        }
        assert!(s.verification.passed);
    }

    #[test]
    fn perturbed_pair_slice() {
        let n = 9;
        let pair = factor_fg(&poly(n, &[(1, 1, 1), (3, 2, 1)]), n).unwrap();
        let s = real_slice(&pair, &SliceGrid::default()).unwrap();
        assert!(s.samples.len() >= 50);
        assert!(s.verification.max_abs_imag_fg <= 1e-9);
        assert!(s.verification.min_real_fg >= -1e-9);
        assert!(s.verification.contact_order_one);
    }

    #[test]
    fn degenerate_pair_rejected() {
        let pair = FactorPair::new(poly(6, &[(0, 1, 1)]), poly(6, &[(0, 1, 1)]));
        assert_eq!(
            real_slice(&pair, &SliceGrid::default()),
            Err(ComplexError::NotGeneralPosition)
        );
    }

    #[test]
    fn contact_order_cases() {
        let n = 4;
        let p = (Complex64::new(0.3, 0.1), Complex64::new(0.3, -0.1));
        let siegel = OneForm2::new(poly(n, &[(0, 1, 1)]), poly(n, &[(1, 0, 1)]));
        // V = {y = conj(x)}: spanned by (1, 0, 1, 0) and (0, 1, 0, −1)
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let graph = [[s, 0.0, s, 0.0], [0.0, s, 0.0, -s]];
        assert_eq!(contact_order(&siegel, p, &graph), Ok(1));

        let x_line = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]];
        let q = (Complex64::new(0.3, 0.1), Complex64::new(0.0, 0.0));
        let dy = OneForm2::new(Poly2::zero(n), Poly2::one(n));
        assert_eq!(contact_order(&dy, q, &x_line), Ok(2));
        let dx = OneForm2::new(Poly2::one(n), Poly2::zero(n));
        assert_eq!(contact_order(&dx, q, &x_line), Ok(0));

        let zero = OneForm2::new(Poly2::zero(n), Poly2::zero(n));
        assert_eq!(contact_order(&zero, q, &x_line), Err(ComplexError::SingularPoint));
    }
}
