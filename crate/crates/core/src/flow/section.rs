//! Section crossings on a ray through the origin: return maps, periodic
//! sequences and bounded-order counts.

use super::integrator::{single_step, CompiledField, DenseStep, IntegratorOptions, State, Stepper};
use super::FlowError;
use crate::series::VectorField2;

/// Minimum `|X·n|` for a crossing to count as transversal.
pub const TRANSVERSALITY_THRESHOLD: f64 = 1e-6;
/// Event times are located to this accuracy.
pub const EVENT_TIME_TOL: f64 = 1e-12;
/// Relative periodicity tolerance `|P(r) − r| ≤ tol·r`.
pub const PERIODICITY_TOL: f64 = 1e-8;
pub const DEFAULT_RETURN_BUDGET: f64 = 100.0;
pub const DEFAULT_SCAN_BUDGET: f64 = 1000.0;
/// Crossing parameters closer than this (relative) are the same point.
pub const CROSSING_DEDUP_REL: f64 = 1e-7;

/// Numeric detection of closed orbits cannot separate a center from a focus
/// whose first obstruction lies past the tolerance horizon.
pub const SLOW_FOCUS_CAVEAT: &str = "numeric periodicity cannot distinguish a center from a \
focus whose return-map drift is below the periodicity tolerance; the symbolic verdict is \
authoritative";

/// The segment `{s·d : 0 < s ≤ length}` from the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransverseSegment {
    direction: [f64; 2],
    length: f64,
}

impl TransverseSegment {
    pub fn new(direction: [f64; 2], length: f64) -> Result<Self, FlowError> {
        let n = direction[0].hypot(direction[1]);
        if !(n.is_finite() && n > 0.0) {
            return Err(FlowError::InvalidInput("segment direction must be nonzero".into()));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(FlowError::InvalidInput("segment length must be positive".into()));
        }
        Ok(Self {
            direction: [direction[0] / n, direction[1] / n],
            length,
        })
    }

    pub fn positive_x_axis(length: f64) -> Self {
        Self::new([1.0, 0.0], length).expect("valid")
    }

    pub fn direction(&self) -> [f64; 2] {
        self.direction
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// `(−d_y, d_x)`.
    pub fn normal(&self) -> [f64; 2] {
        [-self.direction[1], self.direction[0]]
    }

    pub fn point(&self, s: f64) -> State {
        [s * self.direction[0], s * self.direction[1]]
    }

    fn side(&self, p: State) -> f64 {
        let n = self.normal();
        n[0] * p[0] + n[1] * p[1]
    }

    fn param(&self, p: State) -> f64 {
        self.direction[0] * p[0] + self.direction[1] * p[1]
    }

    /// `|X·n| ≥` [`TRANSVERSALITY_THRESHOLD`] with a constant sign at 16
    /// points spread over the segment.
    pub fn check_transverse(&self, field: &VectorField2) -> Result<bool, FlowError> {
        let f = CompiledField::new(field)?;
        let n = self.normal();
        let mut sign = 0.0;
        for k in 1..=16 {
            let v = f.eval(self.point(self.length * k as f64 / 16.0));
            let flux = v[0] * n[0] + v[1] * n[1];
            if flux.abs() < TRANSVERSALITY_THRESHOLD || flux.signum() * sign < 0.0 {
                return Ok(false);
            }
            sign = flux.signum();
        }
        Ok(true)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Crossing {
    pub t: f64,
    pub point: State,
    /// Signed position along the line: `d·p`.
    pub param: f64,
    /// `X·n` at the crossing.
    pub flux: f64,
}

impl Crossing {
    pub fn transversal(&self) -> bool {
        self.flux.abs() >= TRANSVERSALITY_THRESHOLD
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanEnd {
    Stopped,
    Budget,
    LeftBox,
}

/// Root of `n·y(t)` inside one step: Illinois bracketing on the dense
/// output, then Newton with exact re-stepping from the step start.
fn locate(f: &CompiledField, seg: &TransverseSegment, step: &DenseStep, ga: f64, gb: f64) -> Crossing {
    let g = |th: f64| seg.side(step.at_theta(th));
    let (mut a, mut b, mut ga, mut gb) = (0.0, 1.0, ga, gb);
    let mut side = 0;
    for _ in 0..200 {
        if (b - a) * step.h.abs() <= EVENT_TIME_TOL {
            break;
        }
        let c = (a * gb - b * ga) / (gb - ga);
        let c = if c.is_finite() && c > a && c < b { c } else { 0.5 * (a + b) };
        let gc = g(c);
        if gc == 0.0 {
            a = c;
            b = c;
            break;
        }
        if gc.signum() == ga.signum() {
            a = c;
            ga = gc;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            gb = gc;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        }
    }
    let mut t = step.t0 + 0.5 * (a + b) * step.h;
    let at = |t: f64| {
        if t == step.t0 {
            step.y0
        } else {
            single_step(f, step.y0, t - step.t0)
        }
    };
    for _ in 0..6 {
        let p = at(t);
        let v = f.eval(p);
        let n = seg.normal();
        let dg = v[0] * n[0] + v[1] * n[1];
        if dg == 0.0 {
            break;
        }
        let dt = seg.side(p) / dg;
        t = (t - dt).clamp(step.t0, step.t1());
        if dt.abs() <= 0.1 * EVENT_TIME_TOL {
            break;
        }
    }
    let point = at(t);
    let v = f.eval(point);
    let n = seg.normal();
    Crossing {
        t,
        point,
        param: seg.param(point),
        flux: v[0] * n[0] + v[1] * n[1],
    }
}

/// Integrates from `y0` and reports every crossing of the line through the
/// segment until `on_crossing` returns `true`, the budget runs out, or the
/// orbit leaves the box.
pub fn scan_crossings(
    f: &CompiledField,
    y0: State,
    seg: &TransverseSegment,
    t_budget: f64,
    opts: IntegratorOptions,
    mut on_crossing: impl FnMut(&Crossing) -> bool,
) -> Result<(ScanEnd, f64), FlowError> {
    opts.validate()?;
    let sign_of = |g: f64| if g >= 0.0 { 1.0 } else { -1.0 };
    let g0 = seg.side(y0);
    let scale = y0[0].hypot(y0[1]);
    let mut prev = if g0.abs() > 1e-13 * scale {
        sign_of(g0)
    } else {
        let v = f.eval(y0);
        let n = seg.normal();
        sign_of(v[0] * n[0] + v[1] * n[1])
    };
    let mut stepper = Stepper::new(f, y0, opts);
    while stepper.t < t_budget {
        let step = stepper.step(t_budget)?;
        let ga = seg.side(step.y0);
        let gb = seg.side(step.y1);
        let now = if gb == 0.0 { -prev } else { sign_of(gb) };
        if now != prev {
            let ga = if sign_of(ga) == prev && ga != 0.0 {
                ga
            } else {
                prev * f64::MIN_POSITIVE
            };
            let gb = if gb == 0.0 { now * f64::MIN_POSITIVE } else { gb };
            let c = locate(f, seg, &step, ga, gb);
            prev = now;
            if on_crossing(&c) {
                return Ok((ScanEnd::Stopped, c.t));
            }
        }
        if stepper.outside_box() {
            return Ok((ScanEnd::LeftBox, stepper.t));
        }
    }
    Ok((ScanEnd::Budget, stepper.t))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReturnOptions {
    pub integrator: IntegratorOptions,
    pub time_budget: f64,
}

impl Default for ReturnOptions {
    fn default() -> Self {
        Self {
            integrator: IntegratorOptions::default(),
            time_budget: DEFAULT_RETURN_BUDGET,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReturnMapSample {
    pub r_in: f64,
    pub r_out: f64,
    /// Crossings of the section line during the return.
    pub crossings: usize,
    pub time: f64,
    pub converged: bool,
}

fn check_radius(seg: &TransverseSegment, r: f64) -> Result<(), FlowError> {
    if !(r > 0.0 && r <= seg.length()) {
        return Err(FlowError::InvalidInput(format!(
            "radius {r} outside (0, {}]",
            seg.length()
        )));
    }
    Ok(())
}

fn first_return(
    f: &CompiledField,
    seg: &TransverseSegment,
    r: f64,
    opts: &ReturnOptions,
    positive_side: bool,
) -> Result<ReturnMapSample, FlowError> {
    check_radius(seg, r)?;
    let mut crossings = 0;
    let mut hit = None;
    let (end, t) = scan_crossings(f, seg.point(r), seg, opts.time_budget, opts.integrator, |c| {
        crossings += 1;
        let on_target = if positive_side { c.param > 0.0 } else { c.param < 0.0 };
        if on_target && c.transversal() {
            hit = Some(*c);
            true
        } else {
            false
        }
    })?;
    match (end, hit) {
        (ScanEnd::Stopped, Some(c)) => Ok(ReturnMapSample {
            r_in: r,
            r_out: c.param.abs(),
            crossings,
            time: c.t,
            converged: true,
        }),
        _ => Err(FlowError::NoReturn { r, t }),
    }
}

/// First transversal hit of the antipodal ray `−Σ`; returns its distance
/// from the origin.
pub fn half_return_map_with(
    field: &VectorField2,
    seg: &TransverseSegment,
    r: f64,
    opts: &ReturnOptions,
) -> Result<ReturnMapSample, FlowError> {
    first_return(&CompiledField::new(field)?, seg, r, opts, false)
}

pub fn half_return_map(
    field: &VectorField2,
    seg: &TransverseSegment,
    r: f64,
) -> Result<ReturnMapSample, FlowError> {
    half_return_map_with(field, seg, r, &ReturnOptions::default())
}

/// First transversal return to `Σ` itself.
pub fn return_map_with(
    field: &VectorField2,
    seg: &TransverseSegment,
    r: f64,
    opts: &ReturnOptions,
) -> Result<ReturnMapSample, FlowError> {
    first_return(&CompiledField::new(field)?, seg, r, opts, true)
}

pub fn return_map(
    field: &VectorField2,
    seg: &TransverseSegment,
    r: f64,
) -> Result<ReturnMapSample, FlowError> {
    return_map_with(field, seg, r, &ReturnOptions::default())
}

/// Second half-return, started from the antipodal ray.
pub fn composed_half_returns(
    field: &VectorField2,
    seg: &TransverseSegment,
    r: f64,
    opts: &ReturnOptions,
) -> Result<(ReturnMapSample, ReturnMapSample), FlowError> {
    let first = half_return_map_with(field, seg, r, opts)?;
    let flipped = TransverseSegment::new(
        [-seg.direction()[0], -seg.direction()[1]],
        seg.length().max(first.r_out),
    )?;
    let second = half_return_map_with(field, &flipped, first.r_out, opts)?;
    Ok((first, second))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SequenceVerdict {
    PeriodicSequence,
    NotPeriodic,
}

impl SequenceVerdict {
    pub fn label(self) -> &'static str {
        match self {
            SequenceVerdict::PeriodicSequence => "PERIODIC_SEQUENCE",
            SequenceVerdict::NotPeriodic => "NOT_PERIODIC",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicSequenceReport {
    pub verdict: SequenceVerdict,
    pub samples: Vec<ReturnMapSample>,
    /// `P(r) − r`, signed.
    pub residuals: Vec<f64>,
    pub tolerance: f64,
}

/// Full returns at decreasing radii; all relative residuals `≤ 1e-8` means a
/// sequence of closed orbits shrinking to the origin.
pub fn detect_periodic_sequence_with(
    field: &VectorField2,
    seg: &TransverseSegment,
    radii: &[f64],
    opts: &ReturnOptions,
) -> Result<PeriodicSequenceReport, FlowError> {
    if radii.is_empty() {
        return Err(FlowError::InvalidInput("no radii".into()));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) || radii.iter().any(|r| *r <= 0.0) {
        return Err(FlowError::InvalidInput("radii must be positive and decreasing".into()));
    }
    let f = CompiledField::new(field)?;
    let mut samples = Vec::with_capacity(radii.len());
    for &r in radii {
        samples.push(first_return(&f, seg, r, opts, true)?);
    }
    let residuals: Vec<f64> = samples.iter().map(|s| s.r_out - s.r_in).collect();
    let periodic = samples
        .iter()
        .zip(&residuals)
        .all(|(s, d)| d.abs() <= PERIODICITY_TOL * s.r_in);
    Ok(PeriodicSequenceReport {
        verdict: if periodic {
            SequenceVerdict::PeriodicSequence
        } else {
            SequenceVerdict::NotPeriodic
        },
        samples,
        residuals,
        tolerance: PERIODICITY_TOL,
    })
}

pub fn detect_periodic_sequence(
    field: &VectorField2,
    seg: &TransverseSegment,
    radii: &[f64],
) -> Result<PeriodicSequenceReport, FlowError> {
    detect_periodic_sequence_with(field, seg, radii, &ReturnOptions::default())
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundedOrderReport {
    pub point: State,
    /// Distinct points of `Σ` met by the orbit.
    pub count: usize,
    pub bound: usize,
    pub within_bound: bool,
    /// The time budget ran out in at least one direction, so `count` is a
    /// lower bound.
    pub budget_exhausted: bool,
    pub parameters: Vec<f64>,
}

fn dedup_params(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(v.len());
    for p in v {
        match out.last() {
            Some(&q) if (p - q).abs() <= CROSSING_DEDUP_REL * p.abs().max(q.abs()) => {}
            _ => out.push(p),
        }
    }
    out
}

/// Counts the distinct transversal intersections of each orbit with `Σ`,
/// forward and backward in time up to `t_budget` each.
pub fn bounded_order_scan_with(
    field: &VectorField2,
    seg: &TransverseSegment,
    points: &[State],
    k: usize,
    t_budget: f64,
    opts: IntegratorOptions,
) -> Result<Vec<BoundedOrderReport>, FlowError> {
    if k == 0 {
        return Err(FlowError::InvalidInput("bound k must be at least 1".into()));
    }
    if !(t_budget > 0.0) {
        return Err(FlowError::InvalidInput("time budget must be positive".into()));
    }
    let fwd = CompiledField::new(field)?;
    let bwd = fwd.negated();
    let mut reports = Vec::with_capacity(points.len());
    for &p in points {
        let mut params = Vec::new();
        let s0 = seg.param(p);
        let on_segment = s0 > 0.0 && s0 <= seg.length();
        if on_segment && seg.side(p).abs() <= 1e-12 * p[0].hypot(p[1]) {
            params.push(s0);
        }
        let mut exhausted = false;
        for f in [&fwd, &bwd] {
            let (end, _) = scan_crossings(f, p, seg, t_budget, opts, |c| {
                if c.transversal() && c.param > 0.0 && c.param <= seg.length() {
                    params.push(c.param);
                }
                false
            })?;
            exhausted |= end == ScanEnd::Budget;
        }
        let params = dedup_params(params);
        reports.push(BoundedOrderReport {
            point: p,
            count: params.len(),
            bound: k,
            within_bound: params.len() <= k,
            budget_exhausted: exhausted,
            parameters: params,
        });
    }
    Ok(reports)
}

pub fn bounded_order_scan(
    field: &VectorField2,
    seg: &TransverseSegment,
    points: &[State],
    k: usize,
    t_budget: f64,
) -> Result<Vec<BoundedOrderReport>, FlowError> {
    bounded_order_scan_with(field, seg, points, k, t_budget, IntegratorOptions::default())
}
