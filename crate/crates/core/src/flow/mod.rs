//! Numerical dynamics of real planar fields: adaptive integration, return
//! maps on a transverse segment, periodic-sequence detection and
//! bounded-order scans.
//!
//! Everything here runs in `f64` on a compiled copy of the exact field.

mod integrator;
mod section;

use std::io::{self, Write};

use thiserror::Error;

pub use integrator::{single_step, CompiledField, DenseStep, IntegratorOptions, State, Stepper};
pub use section::{
    bounded_order_scan, bounded_order_scan_with, composed_half_returns, detect_periodic_sequence,
    detect_periodic_sequence_with, half_return_map, half_return_map_with, return_map,
    return_map_with, scan_crossings, BoundedOrderReport, Crossing, PeriodicSequenceReport,
    ReturnMapSample, ReturnOptions, ScanEnd, SequenceVerdict, TransverseSegment,
    CROSSING_DEDUP_REL, DEFAULT_RETURN_BUDGET, DEFAULT_SCAN_BUDGET, EVENT_TIME_TOL,
    PERIODICITY_TOL, SLOW_FOCUS_CAVEAT, TRANSVERSALITY_THRESHOLD,
};

use crate::series::{Poly2, VectorField2};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FlowError {
    #[error("step size collapsed to {h:e} at t = {t}")]
    StepUnderflow { t: f64, h: f64 },
    #[error("no return to the section from r = {r} (stopped at t = {t})")]
    NoReturn { r: f64, t: f64 },
    #[error("field is not transverse to the segment")]
    NotTransverse,
    #[error("field has complex coefficients; numeric flow needs a real field")]
    NotReal,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    ReachedTMax,
    LeftBox,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// One sample per accepted step, starting with the initial point.
    pub samples: Vec<Sample>,
    pub steps: Vec<DenseStep>,
    pub tolerance_used: f64,
    pub termination: Termination,
}

impl Trajectory {
    pub fn end(&self) -> Sample {
        *self.samples.last().expect("at least the initial point")
    }

    /// Dense-output position at time `t` inside the integrated range.
    pub fn at(&self, t: f64) -> Option<State> {
        let k = self.steps.partition_point(|s| s.t1() < t);
        let s = self.steps.get(k)?;
        (t >= s.t0).then(|| s.at(t))
    }

    /// CSV with header `t,x,y`, 17 significant digits per value.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,x,y")?;
        // `+ 0.0` turns −0 into 0
        for s in &self.samples {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", s.t + 0.0, s.x + 0.0, s.y + 0.0)?;
        }
        Ok(())
    }
}

pub fn integrate_with(
    field: &VectorField2,
    x0: State,
    t_max: f64,
    opts: IntegratorOptions,
) -> Result<Trajectory, FlowError> {
    opts.validate()?;
    if !(t_max.is_finite() && t_max >= 0.0) {
        return Err(FlowError::InvalidInput("t_max must be nonnegative".into()));
    }
    let f = CompiledField::new(field)?;
    let mut stepper = Stepper::new(&f, x0, opts);
    let mut samples = vec![Sample {
        t: 0.0,
        x: x0[0],
        y: x0[1],
    }];
    let mut steps = Vec::new();
    let mut termination = Termination::ReachedTMax;
    while stepper.t < t_max {
        let step = stepper.step(t_max)?;
        samples.push(Sample {
            t: stepper.t,
            x: step.y1[0],
            y: step.y1[1],
        });
        steps.push(step);
        if stepper.outside_box() {
            termination = Termination::LeftBox;
            break;
        }
    }
    Ok(Trajectory {
        samples,
        steps,
        tolerance_used: opts.tol,
        termination,
    })
}

/// Adaptive Dormand–Prince integration from `x0` until `t_max` or until the
/// orbit leaves the default box.
pub fn integrate(
    field: &VectorField2,
    x0: State,
    t_max: f64,
    tol: f64,
) -> Result<Trajectory, FlowError> {
    integrate_with(field, x0, t_max, IntegratorOptions::with_tol(tol))
}

/// `max |F(x(t)) − F(x0)|` over the accepted steps.
pub fn level_set_conservation(
    field: &VectorField2,
    f: &Poly2,
    x0: State,
    t_max: f64,
    tol: f64,
) -> Result<f64, FlowError> {
    let traj = integrate(field, x0, t_max, tol)?;
    let compiled = CompiledField::new(&VectorField2::new(f.clone(), Poly2::zero(f.truncation())))?;
    let value = |x: f64, y: f64| compiled.eval([x, y])[0];
    let f0 = value(x0[0], x0[1]);
    Ok(traj
        .samples
        .iter()
        .map(|s| (value(s.x, s.y) - f0).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::center::standard_rotation;
    use std::f64::consts::{PI, TAU};

    fn poly(n: u32, t: &[(u32, u32, i64)]) -> Poly2 {
        Poly2::from_int_terms(n, t)
    }

    fn focus() -> VectorField2 {
        VectorField2::new(
            poly(6, &[(0, 1, -1), (3, 0, 1), (1, 2, 1)]),
            poly(6, &[(1, 0, 1), (2, 1, 1), (0, 3, 1)]),
        )
    }

    fn hamiltonian_cubic() -> VectorField2 {
        VectorField2::new(poly(6, &[(0, 1, -1)]), poly(6, &[(1, 0, 1), (2, 0, 1)]))
    }

    /// r′ = r³ with θ′ = 1: 1/r(2π)² = 1/r₀² − 4π.
    fn focus_return(r: f64) -> f64 {
        (1.0 / (r * r) - 4.0 * PI).powf(-0.5)
    }

    #[test]
    fn rotation_closes_after_one_period() {
        let t = integrate(&standard_rotation(4), [0.1, 0.0], TAU, 1e-12).unwrap();
        let e = t.end();
        assert!((e.x - 0.1).abs() < 1e-10 && e.y.abs() < 1e-10);
        assert!(t.samples.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn cusp_hamiltonian_conserved() {
        let cusp = VectorField2::new(poly(4, &[(0, 2, 3)]), poly(4, &[(1, 0, 2)]));
        let h = poly(4, &[(2, 0, 1), (0, 3, -1)]);
        let dev = level_set_conservation(&cusp, &h, [1.0, 1.0], 2.0, 1e-12).unwrap();
        assert!(dev < 1e-8, "{dev}");
    }

    #[test]
    fn focus_moves_outward() {
        let t = integrate(&focus(), [0.1, 0.0], TAU, 1e-12).unwrap();
        let e = t.end();
        assert!(e.x.hypot(e.y) > 0.1);
    }

    #[test]
    fn return_maps() {
        let seg = TransverseSegment::positive_x_axis(0.5);
        let rot = standard_rotation(4);
        assert!((half_return_map(&rot, &seg, 0.1).unwrap().r_out - 0.1).abs() < 1e-10);
        let full = return_map(&rot, &seg, 0.2).unwrap();
        assert!((full.r_out - 0.2).abs() < 1e-10);
        assert_eq!(full.crossings, 2);

        let (a, b) = composed_half_returns(&hamiltonian_cubic(), &seg, 0.1, &ReturnOptions::default())
            .unwrap();
        assert!((b.r_out - 0.1).abs() < 1e-9);
        assert!((a.r_out - 0.1).abs() > 1e-4, "half return of the cubic is not symmetric");

        for r in [0.1, 0.05] {
            let s = return_map(&focus(), &seg, r).unwrap();
            assert!((s.r_out - focus_return(r)).abs() < 1e-4);
        }
    }

    #[test]
    fn half_returns_compose_to_full_return() {
        let seg = TransverseSegment::positive_x_axis(0.5);
        let opts = ReturnOptions::default();
        for r in [0.05, 0.1, 0.15] {
            let full = return_map(&focus(), &seg, r).unwrap();
            let (_, b) = composed_half_returns(&focus(), &seg, r, &opts).unwrap();
            assert!((full.r_out - b.r_out).abs() <= 2.0 * 1e-9, "{} vs {}", full.r_out, b.r_out);
        }
    }

    #[test]
    fn periodic_sequence_detection() {
        let seg = TransverseSegment::positive_x_axis(0.5);
        let radii = [0.2, 0.1, 0.05, 0.025];
        let ham = detect_periodic_sequence(&hamiltonian_cubic(), &seg, &radii).unwrap();
        assert_eq!(ham.verdict, SequenceVerdict::PeriodicSequence);
        let rot = detect_periodic_sequence(&standard_rotation(4), &seg, &radii).unwrap();
        assert!(rot.residuals.iter().all(|d| d.abs() <= 1e-10));
        let foc = detect_periodic_sequence(&focus(), &seg, &radii).unwrap();
        assert_eq!(foc.verdict, SequenceVerdict::NotPeriodic);
        assert!(foc.residuals.iter().all(|d| *d > 0.0));
        // radii decrease, so residuals decrease along the list
        assert!(foc.residuals.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn bounded_order_examples() {
        let seg = TransverseSegment::positive_x_axis(0.5);
        let rot = bounded_order_scan(&standard_rotation(4), &seg, &[[0.1, 0.0]], 1, 200.0).unwrap();
        assert_eq!(rot[0].count, 1);
        assert!(rot[0].within_bound);

        let cusp = VectorField2::new(poly(4, &[(0, 2, 3)]), poly(4, &[(1, 0, 2)]));
        let vertical = TransverseSegment::new([0.0, 1.0], 1.0).unwrap();
        let pts = [[0.05, 0.2], [-0.1, 0.3], [0.02, 0.1]];
        for r in bounded_order_scan(&cusp, &vertical, &pts, 2, DEFAULT_SCAN_BUDGET).unwrap() {
            assert!(r.count >= 1 && r.count <= 2, "{r:?}");
            assert!(!r.budget_exhausted);
        }

        let foc = bounded_order_scan(&focus(), &seg, &[[0.1, 0.0]], 3, 200.0).unwrap();
        assert!(foc[0].count > 3);
    }

    #[test]
    fn level_sets() {
        let rot = standard_rotation(4);
        let r2 = poly(4, &[(2, 0, 1), (0, 2, 1)]);
        assert!(level_set_conservation(&rot, &r2, [0.1, 0.0], 50.0, 1e-12).unwrap() <= 1e-10);
        let f = Poly2::from_terms(
            4,
            [
                (2, 0, crate::series::Coefficient::from_int(1)),
                (0, 2, crate::series::Coefficient::from_int(1)),
                (3, 0, crate::series::Coefficient::ratio(2, 3)),
            ],
        );
        assert!(level_set_conservation(&hamiltonian_cubic(), &f, [0.1, 0.0], 50.0, 1e-12).unwrap() <= 1e-7);
        assert!(level_set_conservation(&focus(), &r2, [0.1, 0.0], 50.0, 1e-12).unwrap() > 1e-4);
    }

    #[test]
    fn csv_format() {
        let t = integrate(&standard_rotation(4), [1.0, 0.0], 0.0, 1e-10).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "t,x,y\n0.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0\n"
        );
    }
}
