//! Dormand–Prince 5(4) with the standard continuous extension.

use super::FlowError;
use crate::series::{Poly2, VectorField2};

pub type State = [f64; 2];

/// A real polynomial field in `f64`, evaluated by explicit power tables.
#[derive(Clone, Debug)]
pub struct CompiledField {
    p: Vec<(usize, usize, f64)>,
    q: Vec<(usize, usize, f64)>,
    max_pow: usize,
}

fn compile(f: &Poly2) -> Vec<(usize, usize, f64)> {
    f.terms()
        .map(|(&(i, j), c)| (i as usize, j as usize, c.to_f64_re()))
        .collect()
}

impl CompiledField {
    pub fn new(field: &VectorField2) -> Result<Self, FlowError> {
        if !field.is_real() {
            return Err(FlowError::NotReal);
        }
        let (p, q) = (compile(field.p()), compile(field.q()));
        let max_pow = p
            .iter()
            .chain(&q)
            .map(|&(i, j, _)| i.max(j))
            .max()
            .unwrap_or(0);
        Ok(Self { p, q, max_pow })
    }

    /// The same field with time reversed.
    pub fn negated(&self) -> Self {
        let neg = |v: &[(usize, usize, f64)]| v.iter().map(|&(i, j, c)| (i, j, -c)).collect();
        Self {
            p: neg(&self.p),
            q: neg(&self.q),
            max_pow: self.max_pow,
        }
    }

    pub fn eval(&self, s: State) -> State {
        let mut xs = [1.0; 32];
        let mut ys = [1.0; 32];
        let n = self.max_pow;
        if n >= 32 {
            return self.eval_slow(s);
        }
        for k in 1..=n {
            xs[k] = xs[k - 1] * s[0];
            ys[k] = ys[k - 1] * s[1];
        }
        let sum = |terms: &[(usize, usize, f64)]| {
            terms.iter().map(|&(i, j, c)| c * xs[i] * ys[j]).sum::<f64>()
        };
        [sum(&self.p), sum(&self.q)]
    }

    fn eval_slow(&self, s: State) -> State {
        let sum = |terms: &[(usize, usize, f64)]| {
            terms
                .iter()
                .map(|&(i, j, c)| c * s[0].powi(i as i32) * s[1].powi(j as i32))
                .sum::<f64>()
        };
        [sum(&self.p), sum(&self.q)]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorOptions {
    /// Mixed absolute/relative local error bound per step.
    pub tol: f64,
    /// Integration stops once `|x|` exceeds this.
    pub box_radius: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            box_radius: 10.0,
            h_min: 1e-14,
            max_steps: 50_000_000,
        }
    }
}

impl IntegratorOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    pub(crate) fn validate(&self) -> Result<(), FlowError> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(FlowError::InvalidInput("tolerance must be positive".into()));
        }
        if !(self.box_radius > 0.0) {
            return Err(FlowError::InvalidInput("box radius must be positive".into()));
        }
        Ok(())
    }
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
/// Continuous-extension weights.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// One accepted step with its interpolant on `θ ∈ [0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DenseStep {
    pub t0: f64,
    pub h: f64,
    pub y0: State,
    pub y1: State,
    r: [State; 5],
}

impl DenseStep {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn at_theta(&self, th: f64) -> State {
        let s = 1.0 - th;
        let mut out = [0.0; 2];
        for (k, o) in out.iter_mut().enumerate() {
            let r = |m: usize| self.r[m][k];
            *o = r(0) + th * (r(1) + s * (r(2) + th * (r(3) + s * r(4))));
        }
        out
    }

    pub fn at(&self, t: f64) -> State {
        self.at_theta((t - self.t0) / self.h)
    }
}

fn axpy(y: State, h: f64, coeffs: &[f64], ks: &[State]) -> State {
    let mut out = y;
    for (c, k) in coeffs.iter().zip(ks) {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

/// Stages of one step; returns `(y1, error vector, k)`.
fn stages(f: &CompiledField, y: State, k1: State, h: f64) -> (State, State, [State; 7]) {
    let mut k = [[0.0; 2]; 7];
    k[0] = k1;
    for s in 1..7 {
        let ys = axpy(y, h, &A[s][..s], &k[..s]);
        k[s] = f.eval(ys);
    }
    let y1 = axpy(y, h, &A[6][..6], &k[..6]);
    let mut err = [0.0; 2];
    for (e, kk) in E.iter().zip(&k) {
        err[0] += h * e * kk[0];
        err[1] += h * e * kk[1];
    }
    (y1, err, k)
}

/// A single fixed-size step, used to land exactly on event times.
pub fn single_step(f: &CompiledField, y: State, h: f64) -> State {
    stages(f, y, f.eval(y), h).0
}

/// Stepper state shared by plain integration and event location.
pub struct Stepper<'a> {
    f: &'a CompiledField,
    opts: IntegratorOptions,
    pub t: f64,
    pub y: State,
    k1: State,
    h: f64,
    steps: usize,
}

impl<'a> Stepper<'a> {
    pub fn new(f: &'a CompiledField, y0: State, opts: IntegratorOptions) -> Self {
        let k1 = f.eval(y0);
        let scale = 1.0 + y0[0].abs().max(y0[1].abs());
        let speed = k1[0].abs().max(k1[1].abs()).max(1e-12);
        let h = (0.01 * scale / speed).min(0.1);
        Self {
            f,
            opts,
            t: 0.0,
            y: y0,
            k1,
            h,
            steps: 0,
        }
    }

    /// Advances by one accepted step, never beyond `t_end`.
    pub fn step(&mut self, t_end: f64) -> Result<DenseStep, FlowError> {
        loop {
            if self.steps >= self.opts.max_steps {
                return Err(FlowError::InvalidInput("step limit exceeded".into()));
            }
            let remaining = t_end - self.t;
            let h = self.h.min(remaining);
            if h < self.opts.h_min && remaining > self.opts.h_min {
                return Err(FlowError::StepUnderflow { t: self.t, h });
            }
            let (y1, err, k) = stages(self.f, self.y, self.k1, h);
            let mut e: f64 = 0.0;
            for c in 0..2 {
                let sc = self.opts.tol * (1.0 + self.y[c].abs().max(y1[c].abs()));
                e = e.max((err[c] / sc).abs());
            }
            if !e.is_finite() {
                self.h = h * 0.2;
                continue;
            }
            let factor = if e == 0.0 {
                5.0
            } else {
                (0.9 * e.powf(-0.2)).clamp(0.2, 5.0)
            };
            if e <= 1.0 {
                self.steps += 1;
                let y0 = self.y;
                let ydiff = [y1[0] - y0[0], y1[1] - y0[1]];
                let mut r = [[0.0; 2]; 5];
                for c in 0..2 {
                    let bspl = h * k[0][c] - ydiff[c];
                    r[0][c] = y0[c];
                    r[1][c] = ydiff[c];
                    r[2][c] = bspl;
                    r[3][c] = ydiff[c] - h * k[6][c] - bspl;
                    r[4][c] = h * D.iter().zip(&k).map(|(d, kk)| d * kk[c]).sum::<f64>();
                }
                let step = DenseStep {
                    t0: self.t,
                    h,
                    y0,
                    y1,
                    r,
                };
                self.t = if h == remaining { t_end } else { self.t + h };
                self.y = y1;
                self.k1 = k[6];
                // Do not let a short final step shrink the next proposal.
                self.h = if h < self.h { self.h } else { h * factor };
                return Ok(step);
            }
            self.h = h * factor.min(1.0);
        }
    }

    pub fn outside_box(&self) -> bool {
        self.y[0].hypot(self.y[1]) > self.opts.box_radius
    }
}
