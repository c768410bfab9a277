//! Subcommand pipelines: spec in, report out.

use std::fs;
use std::path::{Path, PathBuf};

use centerfocus_core::center::{certify_center, CenterCertificate, Verdict, DEFAULT_ORDER};
use centerfocus_core::complex::{
    blowup, complexify, factor_fg, formal_first_integral_siegel, real_slice, siegel_check,
    ComplexError, FactorPair, SiegelForm, SiegelIntegral, SliceGrid,
};
use centerfocus_core::flow::{
    bounded_order_scan_with, detect_periodic_sequence_with, integrate, FlowError, IntegratorOptions,
    ReturnOptions, SequenceVerdict, TransverseSegment, CROSSING_DEDUP_REL, DEFAULT_SCAN_BUDGET,
    EVENT_TIME_TOL, PERIODICITY_TOL, SLOW_FOCUS_CAVEAT, TRANSVERSALITY_THRESHOLD,
};
use centerfocus_core::germ::{
    finite_order, multiplier_order, pseudo_orbit_with_multiplier, pseudo_orbit_with_tolerance,
    OrbitOutcome, DEFAULT_ESCAPE_RADIUS, PERIOD_TOLERANCE,
};
use centerfocus_core::series::OneForm2;
use num_complex::Complex64;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::report::*;
use crate::spec::{
    check_decreasing_radii, check_positive, check_radii, ComplexFormSpec, GermSpec, Problem,
    ProblemSpec, RealFieldSpec, SectionSpec, SpecError,
};

pub const DEFAULT_RADII: [f64; 4] = [0.2, 0.1, 0.05, 0.025];
pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_SECTION_LENGTH: f64 = 0.5;
pub const DEFAULT_K_MAX: u32 = 64;
pub const DEFAULT_ORBIT_STEPS: u32 = 200;
pub const DEFAULT_GERM_RADII: [f64; 1] = [0.05];
const GERM_SEED_ANGLES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Lyapunov,
    ReturnMap,
    Blowup,
    Germ,
    Slice,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Lyapunov => "lyapunov",
            Command::ReturnMap => "returnmap",
            Command::Blowup => "blowup",
            Command::Germ => "germ",
            Command::Slice => "slice",
        }
    }
}

/// Command-line values that take precedence over the spec's `analysis`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub truncation: Option<u32>,
    pub tol: Option<f64>,
    pub radii: Option<Vec<f64>>,
    pub dump_orbits: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("`{command}` does not apply to a {kind} spec")]
    WrongKind {
        command: &'static str,
        kind: &'static str,
    },
    #[error("cannot write orbit dump {path}: {source}")]
    Dump {
        path: String,
        source: std::io::Error,
    },
}

fn wrong_kind(command: Command, spec: &ProblemSpec) -> RunError {
    RunError::WrongKind {
        command: command.name(),
        kind: spec.kind(),
    }
}

fn check_overrides(o: &Overrides, kind: &str) -> Result<(), SpecError> {
    if let Some(t) = o.tol {
        check_positive("--tol", t)?;
    }
    if let Some(r) = &o.radii {
        if kind == "real_field" {
            check_decreasing_radii("--radii", r)?;
        } else {
            check_radii("--radii", r)?;
        }
    }
    Ok(())
}

/// Runs `command` on a parsed spec; `input` is the raw spec text, hashed for
/// provenance.
pub fn run(
    command: Command,
    spec: &ProblemSpec,
    input: &[u8],
    overrides: &Overrides,
) -> Result<Report, RunError> {
    check_overrides(overrides, spec.kind())?;
    let mut tolerances = Tolerances {
        integrator: Num(DEFAULT_TOL),
        event_time: Num(EVENT_TIME_TOL),
        transversality: Num(TRANSVERSALITY_THRESHOLD),
        periodicity_relative: Num(PERIODICITY_TOL),
        crossing_dedup_relative: Num(CROSSING_DEDUP_REL),
        slice_sample: Num(SliceGrid::default().sample_tol),
        slice_residual: Num(SliceGrid::default().residual_tol),
        slice_step: Num(SliceGrid::default().step_tol),
        germ_period: Num(PERIOD_TOLERANCE),
    };
    let (sections, failed, summary) = match (&spec.problem, command) {
        (
            Problem::RealField(r),
            Command::Analyze | Command::Lyapunov | Command::ReturnMap,
        ) => {
            let tol = overrides.tol.or(r.analysis.tol).unwrap_or(DEFAULT_TOL);
            tolerances.integrator = Num(tol);
            let s = real_pipeline(r, command, overrides, tol)?;
            let failed = [
                s.return_map.is_failed(),
                s.bounded_order.is_failed(),
                s.lyapunov.is_failed(),
            ]
            .contains(&true);
            let summary = real_summary(&s);
            (Sections::Real(Box::new(s)), failed, summary)
        }
        (Problem::RealField(r), Command::Blowup | Command::Slice) => {
            no_dump(overrides, command, spec)?;
            let s = complex_from_real(r, spec.truncation, command, overrides);
            finish_complex(s, &mut tolerances)
        }
        (Problem::ComplexForm(c), Command::Analyze | Command::Blowup | Command::Slice) => {
            no_dump(overrides, command, spec)?;
            let s = complex_pipeline(c, spec.truncation, command, overrides);
            finish_complex(s, &mut tolerances)
        }
        (Problem::Germ(g), Command::Analyze | Command::Germ) => {
            no_dump(overrides, command, spec)?;
            let s = germ_pipeline(g, overrides);
            tolerances.germ_period = Num(g.analysis.period_tol.unwrap_or(PERIOD_TOLERANCE));
            let summary = germ_summary(&s);
            (Sections::Germ(Box::new(s)), false, summary)
        }
        _ => return Err(wrong_kind(command, spec)),
    };
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        kind: spec.kind(),
        name: spec.name.clone(),
        truncation: spec.truncation,
        provenance: Provenance {
            generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            input_sha256: format!("{:x}", Sha256::digest(input)),
            tool: "centerfocus",
            tool_version: env!("CARGO_PKG_VERSION"),
            command: command.name().to_string(),
            tolerances,
        },
        status: if failed { "numeric_failure" } else { "ok" },
        summary,
        sections,
    })
}

fn no_dump(o: &Overrides, command: Command, spec: &ProblemSpec) -> Result<(), RunError> {
    match o.dump_orbits {
        Some(_) => Err(SpecError::Validation {
            field: "--dump-orbits".into(),
            message: format!(
                "orbit dumps come from real-field return maps, not `{}` on a {} spec",
                command.name(),
                spec.kind()
            ),
        }
        .into()),
        None => Ok(()),
    }
}

fn finish_complex(
    s: ComplexSections,
    tol: &mut Tolerances,
) -> (Sections, bool, String) {
    if let Some(sl) = s.slice.value() {
        tol.slice_sample = sl.tol;
    }
    let failed = [
        s.blowup.is_failed(),
        s.first_integral.is_failed(),
        s.factor.is_failed(),
        s.slice.is_failed(),
    ]
    .contains(&true);
    let summary = complex_summary(&s);
    (Sections::Complex(Box::new(s)), failed, summary)
}

// ---- real fields -------------------------------------------------------

fn segment(s: &Option<SectionSpec>) -> TransverseSegment {
    match s {
        Some(s) => TransverseSegment::new(s.direction, s.length).expect("validated section"),
        None => TransverseSegment::positive_x_axis(DEFAULT_SECTION_LENGTH),
    }
}

fn section_out(seg: &TransverseSegment) -> SectionOut {
    SectionOut {
        direction: point(seg.direction()),
        length: Num(seg.length()),
    }
}

fn obstruction_rows(obs: &[centerfocus_core::center::Obstruction]) -> Vec<ObstructionOut> {
    obs.iter()
        .map(|o| ObstructionOut {
            index: o.index,
            degree: o.degree(),
            value: exact(&o.value),
            approx: Num(o.value.to_f64_re()),
        })
        .collect()
}

fn verdict_out(v: &Verdict) -> VerdictOut {
    let mut out = VerdictOut {
        label: v.label(),
        order: None,
        index: None,
        degree: None,
        eta: None,
        unstable: None,
        reason: None,
        summary: String::new(),
    };
    match v {
        Verdict::CenterToOrder { order } => {
            out.order = Some(*order);
            out.summary = format!("every obstruction up to degree {order} vanishes");
        }
        Verdict::Focus {
            index,
            degree,
            eta,
            unstable,
        } => {
            out.index = Some(*index);
            out.degree = Some(*degree);
            out.eta = Some(exact(eta));
            out.unstable = Some(*unstable);
            out.summary = format!(
                "{} focus: first nonzero obstruction eta_{index} = {eta} at degree {degree}",
                if *unstable { "unstable" } else { "stable" }
            );
        }
        Verdict::NotApplicable { reason } => {
            out.reason = Some(reason.to_string());
            out.summary = format!("not applicable: {reason}");
        }
    }
    out
}

fn symbolic_stages(
    cert: &CenterCertificate,
    order: u32,
) -> (Stage<NormalizationOut>, Stage<LyapunovOut>, Stage<MorseOut>) {
    let reason = match &cert.verdict {
        Verdict::NotApplicable { reason } => Some(reason.to_string()),
        _ => None,
    };
    let norm = match &cert.normalization {
        Some(n) => Stage::ok(
            format!("linear part conjugated to the standard rotation, time scaled by {}", n.time_rescale),
            NormalizationOut {
                change_matrix: matrix(&n.change_matrix),
                time_rescale: exact(&n.time_rescale),
                normalized: PairOut::from(&n.normalized),
            },
        ),
        None => Stage::not_applicable(reason.clone().unwrap_or_default()),
    };
    let lyap = match (&cert.report, &cert.normalization) {
        (Some(r), _) => {
            let summary = match r.first_nonzero_obstruction() {
                Some(o) => format!(
                    "first nonzero obstruction eta_{} = {} (degree {}) at truncation {}",
                    o.index,
                    o.value,
                    o.degree(),
                    r.truncation_degree
                ),
                None => format!(
                    "all {} obstructions vanish to truncation {}",
                    r.obstructions.len(),
                    r.truncation_degree
                ),
            };
            Stage::ok(
                summary,
                LyapunovOut {
                    order_requested: order,
                    truncation_degree: r.truncation_degree,
                    obstructions: obstruction_rows(&r.obstructions),
                    first_nonzero: r.first_nonzero,
                    first_integral: SeriesOut::from(&r.first_integral),
                },
            )
        }
        (None, Some(_)) => Stage::not_applicable(reason.clone().unwrap_or_default()),
        (None, None) => Stage::skipped("normalization not available"),
    };
    let morse = match &cert.morse {
        Some(m) => Stage::ok(
            if m.center_compatible() {
                "first integral has a nondegenerate definite critical point at 0".to_string()
            } else {
                "first integral is not Morse-definite at 0".to_string()
            },
            MorseOut {
                critical: m.critical,
                nondegenerate: m.nondegenerate,
                definite: m.definite,
                hessian_det: exact(&m.hessian_det),
                center_compatible: m.center_compatible(),
            },
        ),
        None => Stage::skipped("no first integral"),
    };
    (norm, lyap, morse)
}

fn dump_orbits(
    dir: &Path,
    spec: &RealFieldSpec,
    seg: &TransverseSegment,
    rows: &[ReturnRow],
    tol: f64,
) -> Result<(), RunError> {
    let io = |path: &Path, source| RunError::Dump {
        path: path.display().to_string(),
        source,
    };
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    for (k, row) in rows.iter().enumerate() {
        let path = dir.join(format!("orbit_{k:02}.csv"));
        let t_max = row.time.0;
        let Ok(traj) = integrate(&spec.field, seg.point(row.r_in.0), t_max, tol) else {
            continue;
        };
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).expect("writing to memory");
        fs::write(&path, buf).map_err(|e| io(&path, e))?;
    }
    Ok(())
}

/// A missing return or a tangent section means the map is undefined for this
/// input; only integrator breakdowns count as numeric failures.
fn flow_error_stage<T>(e: FlowError) -> Stage<T> {
    match e {
        FlowError::NoReturn { .. } | FlowError::NotTransverse => Stage::not_applicable(e),
        e => Stage::failed(e),
    }
}

fn real_pipeline(
    spec: &RealFieldSpec,
    command: Command,
    o: &Overrides,
    tol: f64,
) -> Result<RealSections, RunError> {
    let a = &spec.analysis;
    let symbolic = matches!(command, Command::Analyze | Command::Lyapunov);
    let numeric = matches!(command, Command::Analyze | Command::ReturnMap);
    let order = o.truncation.or(a.order).unwrap_or(DEFAULT_ORDER);

    let (cert, normalization, lyapunov, morse) = if symbolic {
        let cert = certify_center(&spec.field, order);
        let (n, l, m) = symbolic_stages(&cert, order);
        (Some(cert), n, l, m)
    } else {
        let skip = || "not requested by this command".to_string();
        (None, Stage::skipped(skip()), Stage::skipped(skip()), Stage::skipped(skip()))
    };
    let verdict = cert.as_ref().map(|c| verdict_out(&c.verdict));

    let seg = segment(&a.section);
    let opts = ReturnOptions {
        integrator: IntegratorOptions::with_tol(tol),
        ..ReturnOptions::default()
    };
    let return_map = if numeric {
        let radii = o
            .radii
            .clone()
            .or_else(|| a.radii.clone())
            .unwrap_or_else(|| DEFAULT_RADII.to_vec());
        match detect_periodic_sequence_with(&spec.field, &seg, &radii, &opts) {
            Ok(rep) => {
                let rows: Vec<ReturnRow> = rep
                    .samples
                    .iter()
                    .zip(&rep.residuals)
                    .map(|(s, d)| ReturnRow {
                        r_in: Num(s.r_in),
                        r_out: Num(s.r_out),
                        residual: Num(*d),
                        relative_residual: Num(d / s.r_in),
                        crossings: s.crossings,
                        time: Num(s.time),
                        tol: Num(tol),
                        periodicity_tol: Num(rep.tolerance),
                    })
                    .collect();
                if let Some(dir) = &o.dump_orbits {
                    dump_orbits(dir, spec, &seg, &rows, tol)?;
                }
                let worst = rows
                    .iter()
                    .map(|r| r.relative_residual.0.abs())
                    .fold(0.0, f64::max);
                Stage::ok(
                    format!(
                        "{} over {} radii (max relative residual {:.3e}, tolerance {:.0e})",
                        rep.verdict.label(),
                        rows.len(),
                        worst,
                        rep.tolerance
                    ),
                    ReturnMapOut {
                        section: section_out(&seg),
                        verdict: rep.verdict.label(),
                        rows,
                    },
                )
            }
            Err(e) => flow_error_stage(e),
        }
    } else {
        Stage::skipped("not requested by this command")
    };

    let bounded_order = match (&a.bounded_order, numeric) {
        (Some(b), true) => {
            let bseg = match &b.section {
                Some(_) => segment(&b.section),
                None => seg,
            };
            let budget = b.t_budget.unwrap_or(DEFAULT_SCAN_BUDGET);
            match bounded_order_scan_with(
                &spec.field,
                &bseg,
                &b.points,
                b.k,
                budget,
                IntegratorOptions::with_tol(tol),
            ) {
                Ok(reports) => {
                    let within = reports.iter().filter(|r| r.within_bound).count();
                    let rows = reports
                        .iter()
                        .map(|r| BoundedOrderRow {
                            point: point(r.point),
                            count: r.count,
                            bound: r.bound,
                            within_bound: r.within_bound,
                            budget_exhausted: r.budget_exhausted,
                            parameters: r.parameters.iter().map(|&p| Num(p)).collect(),
                            tol: Num(tol),
                        })
                        .collect();
                    Stage::ok(
                        format!("{within} of {} orbits meet the segment at most {} times", reports.len(), b.k),
                        BoundedOrderOut {
                            section: section_out(&bseg),
                            t_budget: Num(budget),
                            rows,
                        },
                    )
                }
                Err(e) => flow_error_stage(e),
            }
        }
        (Some(_), false) => Stage::skipped("not requested by this command"),
        (None, _) => Stage::skipped("no bounded_order request in the spec"),
    };

    let combined = (command == Command::Analyze).then(|| {
        let symbolic = cert.as_ref().expect("symbolic ran").verdict.clone();
        let numeric = return_map.value().map(|r| r.verdict);
        let agreement = match (&symbolic, numeric) {
            (Verdict::NotApplicable { .. }, _) | (_, None) => None,
            (v, Some(n)) => Some(v.is_center() == (n == SequenceVerdict::PeriodicSequence.label())),
        };
        let summary = match agreement {
            Some(true) => format!(
                "symbolic {} and numeric {} agree",
                symbolic.label(),
                numeric.unwrap_or_default()
            ),
            Some(false) => format!(
                "symbolic {} and numeric {} DISAGREE",
                symbolic.label(),
                numeric.unwrap_or_default()
            ),
            None => format!(
                "no comparison: symbolic {}, numeric {}",
                symbolic.label(),
                numeric.unwrap_or("unavailable")
            ),
        };
        CombinedOut {
            symbolic: symbolic.label(),
            numeric,
            agreement,
            caveat: SLOW_FOCUS_CAVEAT,
            summary,
        }
    });

    Ok(RealSections {
        input: PairOut::from(&spec.field),
        normalization,
        lyapunov,
        morse,
        verdict,
        return_map,
        bounded_order,
        combined,
    })
}

fn real_summary(s: &RealSections) -> String {
    if let Some(c) = &s.combined {
        return c.summary.clone();
    }
    if let Some(v) = &s.verdict {
        return format!("{}: {}", v.label, v.summary);
    }
    s.return_map.summary.clone()
}

// ---- complex forms -----------------------------------------------------

fn complex_from_real(
    spec: &RealFieldSpec,
    truncation: u32,
    command: Command,
    o: &Overrides,
) -> ComplexSections {
    let order = o.truncation.or(spec.analysis.order).unwrap_or(truncation);
    match centerfocus_core::center::normalize_rotation(&spec.field) {
        Ok(norm) => {
            let sf = complexify(&norm);
            let siegel = Stage::ok(
                "complexified in u = x + iy, v = x - iy; linear part is x dy + y dx",
                SiegelOut {
                    complexified: true,
                    change_matrix: sf.change_record().map(matrix),
                    is_siegel: true,
                    form: PairOut::from(sf.form()),
                },
            );
            complex_stages(siegel, sf.form(), Some(&sf), order, None, command, o)
        }
        Err(e) => {
            let msg = e.to_string();
            ComplexSections {
                siegel: Stage::not_applicable(msg.clone()),
                blowup: Stage::not_applicable(msg.clone()),
                first_integral: Stage::not_applicable(msg.clone()),
                factor: Stage::not_applicable(msg.clone()),
                slice: Stage::not_applicable(msg),
            }
        }
    }
}

fn complex_pipeline(
    spec: &ComplexFormSpec,
    truncation: u32,
    command: Command,
    o: &Overrides,
) -> ComplexSections {
    let order = o.truncation.or(spec.analysis.order).unwrap_or(truncation);
    let is_siegel = siegel_check(&spec.form);
    let siegel = Stage::ok(
        if is_siegel {
            "linear part is exactly x dy + y dx"
        } else {
            "linear part is not x dy + y dx; first-integral stages do not apply"
        },
        SiegelOut {
            complexified: false,
            change_matrix: None,
            is_siegel,
            form: PairOut::from(&spec.form),
        },
    );
    let sf = SiegelForm::new(spec.form.clone()).ok();
    let grid = slice_grid(spec, o);
    complex_stages(siegel, &spec.form, sf.as_ref(), order, Some(grid), command, o)
}

fn slice_grid(spec: &ComplexFormSpec, o: &Overrides) -> SliceGrid {
    let mut g = SliceGrid::default();
    if let Some(s) = &spec.analysis.slice {
        if let Some(r) = &s.radii {
            g.radii = r.clone();
        }
        if let Some(a) = s.angles {
            g.angles = a;
        }
    }
    if let Some(r) = &o.radii {
        g.radii = r.clone();
    }
    g
}

fn complex_stages(
    siegel: Stage<SiegelOut>,
    form: &OneForm2,
    sf: Option<&SiegelForm>,
    order: u32,
    grid: Option<SliceGrid>,
    command: Command,
    o: &Overrides,
) -> ComplexSections {
    let want_blowup = matches!(command, Command::Analyze | Command::Blowup);
    let want_slice = matches!(command, Command::Analyze | Command::Slice);
    macro_rules! skip {
        () => {
            Stage::skipped("not requested by this command")
        };
    }

    let blowup_stage = if want_blowup {
        blowup_stage(form)
    } else {
        skip!()
    };
    if !want_slice {
        return ComplexSections {
            siegel,
            blowup: blowup_stage,
            first_integral: skip!(),
            factor: skip!(),
            slice: skip!(),
        };
    }
    let Some(sf) = sf else {
        return ComplexSections {
            siegel,
            blowup: blowup_stage,
            first_integral: Stage::not_applicable(ComplexError::NotSiegel),
            factor: Stage::not_applicable(ComplexError::NotSiegel),
            slice: Stage::not_applicable(ComplexError::NotSiegel),
        };
    };
    let (first_integral, integral) = integral_stage(sf, order);
    let (factor, pair) = match &integral {
        Some(i) => factor_stage(i),
        None => (Stage::skipped("no first integral"), None),
    };
    let mut grid = grid.unwrap_or_default();
    if let Some(r) = &o.radii {
        grid.radii = r.clone();
    }
    let slice = match &pair {
        Some(p) => slice_stage(p, &grid),
        None => Stage::skipped("no factorization"),
    };
    ComplexSections {
        siegel,
        blowup: blowup_stage,
        first_integral,
        factor,
        slice,
    }
}

fn blowup_stage(form: &OneForm2) -> Stage<BlowupOut> {
    match blowup(form) {
        Ok(b) => {
            let points: Vec<DivisorPointOut> = b
                .singularities_on_e
                .iter()
                .map(|p| DivisorPointOut {
                    chart: p.chart.name(),
                    location: complex(p.location),
                    exact_location: p.exact_location.as_ref().map(exact),
                    multiplicity: p.multiplicity,
                    eigenvalues: p.eigenvalues.map(|(a, b)| [complex(a), complex(b)]),
                    eigenvalue_ratio: p.eigenvalue_ratio().map(complex),
                })
                .collect();
            let summary = if b.is_dicritical() {
                format!(
                    "dicritical: exceptional divisor not invariant, {} tangency points",
                    points.len()
                )
            } else {
                format!(
                    "invariant exceptional divisor with {} singular points",
                    points.len()
                )
            };
            Stage::ok(
                summary,
                BlowupOut {
                    order: b.order,
                    divided_power: b.divided_power,
                    divisor_invariant: b.divisor_invariant,
                    dicritical: b.is_dicritical(),
                    chart_t: PairOut::from(&b.chart_t),
                    chart_s: PairOut::from(&b.chart_s),
                    singularities_on_e: points,
                },
            )
        }
        Err(e @ ComplexError::NotIsolated { .. }) => Stage::not_applicable(e),
        Err(e) => Stage::failed(e),
    }
}

fn integral_stage(sf: &SiegelForm, order: u32) -> (Stage<IntegralOut>, Option<SiegelIntegral>) {
    match formal_first_integral_siegel(sf, order) {
        Ok(i) => {
            let summary = match i.first_nonzero {
                None => format!(
                    "formal first integral xy + ... to degree {}, all {} obstructions zero",
                    i.truncation_degree,
                    i.obstructions.len()
                ),
                Some(j) => format!(
                    "resonant obstruction at (xy)^{j}; no formal first integral to degree {}",
                    i.truncation_degree
                ),
            };
            let out = IntegralOut {
                order_requested: order,
                truncation_degree: i.truncation_degree,
                first_integral: SeriesOut::from(&i.first_integral),
                obstructions: i
                    .obstructions
                    .iter()
                    .map(|o| ObstructionOut {
                        index: o.index,
                        degree: o.degree(),
                        value: exact(&o.value),
                        approx: Num(o.value.to_complex64().norm()),
                    })
                    .collect(),
                first_nonzero: i.first_nonzero,
                formal_first_integral: i.is_formal_first_integral(),
            };
            (Stage::ok(summary, out), Some(i))
        }
        Err(e) => (Stage::not_applicable(e), None),
    }
}

fn factor_stage(i: &SiegelIntegral) -> (Stage<FactorOut>, Option<FactorPair>) {
    match factor_fg(&i.first_integral, i.truncation_degree) {
        Ok(pair) => {
            let exact_ok = pair.reconstruction().agrees_with(&i.first_integral);
            let out = FactorOut {
                f: SeriesOut::from(&pair.f),
                g: SeriesOut::from(&pair.g),
                branch_f: SeriesOut::from(&pair.branch_f),
                branch_g: SeriesOut::from(&pair.branch_g),
                unit: SeriesOut::from(&pair.unit),
                general_position: pair.general_position,
                reconstruction_exact: exact_ok,
            };
            let summary = if exact_ok {
                "F = f*g*unit exactly to truncation"
            } else {
                "reconstruction of F from its branches FAILED"
            };
            (Stage::ok(summary, out), Some(pair))
        }
        Err(e @ ComplexError::BranchFailure { .. }) => (Stage::failed(e), None),
        Err(e) => (Stage::not_applicable(e), None),
    }
}

fn slice_stage(pair: &FactorPair, grid: &SliceGrid) -> Stage<SliceOut> {
    match real_slice(pair, grid) {
        Ok(s) => {
            let v = &s.verification;
            let summary = format!(
                "{} {} samples: max |Im fg| = {:.3e}, min Re fg = {:.3e}, contact order one: {}",
                if v.passed { "passed on" } else { "FAILED on" },
                s.samples.len(),
                v.max_abs_imag_fg,
                v.min_real_fg,
                v.contact_order_one
            );
            let rows = s
                .samples
                .iter()
                .map(|p| SliceRow {
                    x: complex(p.x),
                    y: complex(p.y),
                    fg: complex(p.fg),
                    contact_order: p.contact_order,
                    tol: Num(s.tol),
                })
                .collect();
            Stage::ok(
                summary,
                SliceOut {
                    tol: Num(s.tol),
                    seeds: s.seeds,
                    failures: s.failures,
                    sample_count: s.samples.len(),
                    max_abs_imag_fg: Num(v.max_abs_imag_fg),
                    min_real_fg: Num(v.min_real_fg),
                    contact_order_one: v.contact_order_one,
                    passed: v.passed,
                    samples: rows,
                },
            )
        }
        Err(e @ ComplexError::NotGeneralPosition) => Stage::not_applicable(e),
        Err(e) => Stage::failed(e),
    }
}

fn complex_summary(s: &ComplexSections) -> String {
    [
        ("blowup", &s.blowup.summary, s.blowup.status),
        ("first integral", &s.first_integral.summary, s.first_integral.status),
        ("slice", &s.slice.summary, s.slice.status),
    ]
    .into_iter()
    .filter(|(_, _, st)| *st != StageStatus::Skipped)
    .map(|(name, text, _)| format!("{name}: {text}"))
    .collect::<Vec<_>>()
    .join("; ")
}

// ---- germs -------------------------------------------------------------

fn germ_seeds(spec: &GermSpec, o: &Overrides) -> Vec<Complex64> {
    if o.radii.is_none() {
        if let Some(seeds) = &spec.analysis.seeds {
            return seeds.iter().map(|s| Complex64::new(s[0], s[1])).collect();
        }
    }
    let radii = o
        .radii
        .clone()
        .or_else(|| spec.analysis.radii.clone())
        .unwrap_or_else(|| DEFAULT_GERM_RADII.to_vec());
    radii
        .iter()
        .flat_map(|&r| {
            (0..GERM_SEED_ANGLES).map(move |k| {
                let theta = std::f64::consts::TAU * k as f64 / GERM_SEED_ANGLES as f64;
                Complex64::from_polar(r, theta)
            })
        })
        .collect()
}

fn germ_pipeline(spec: &GermSpec, o: &Overrides) -> GermSections {
    let a = &spec.analysis;
    let germ = &spec.germ;
    let k_max = a.k_max.unwrap_or(DEFAULT_K_MAX);
    let exact_mult = spec.exact_multiplier();
    let lambda = match (exact_mult, spec.multiplier_root) {
        (false, Some(r)) => r.to_complex64(),
        _ => germ.multiplier().to_complex64(),
    };
    let m_order = match (exact_mult, spec.multiplier_root) {
        (false, Some(r)) => Some(r.order()),
        _ => multiplier_order(germ.multiplier()),
    };
    let coefficients = germ
        .terms()
        .filter(|(d, _)| exact_mult || *d > 1)
        .map(|(d, c)| (d, exact(c)))
        .collect();
    let germ_out = GermOut {
        truncation: germ.truncation(),
        coefficients,
        multiplier: exact_mult.then(|| exact(germ.multiplier())),
        multiplier_root: spec.multiplier_root.map(|r| [r.p, r.q]),
        multiplier_approx: complex(lambda),
        multiplier_order: m_order,
    };

    let finite = if exact_mult {
        match finite_order(germ, k_max) {
            Ok(ord) => Stage::ok(
                match ord {
                    Some(k) => format!("f^{k} = Id to degree {}", germ.truncation()),
                    None => format!("no iterate f^k with k <= {k_max} is the identity"),
                },
                FiniteOrderOut {
                    k_max,
                    method: "exact",
                    order: ord,
                },
            ),
            Err(e) => Stage::not_applicable(e),
        }
    } else {
        let m = m_order.unwrap_or_default();
        Stage {
            status: StageStatus::NotApplicable,
            summary: format!(
                "multiplier has order {m} but no exact value in Q(i); see the pseudo-orbit table"
            ),
            error: None,
            result: Some(FiniteOrderOut {
                k_max,
                method: "numeric_only",
                order: None,
            }),
        }
    };

    let steps = a.orbit_steps.unwrap_or(DEFAULT_ORBIT_STEPS);
    let escape = a.escape_radius.unwrap_or(DEFAULT_ESCAPE_RADIUS);
    let ptol = a.period_tol.unwrap_or(PERIOD_TOLERANCE);
    let orbits: Vec<_> = germ_seeds(spec, o)
        .into_iter()
        .map(|z| {
            if exact_mult {
                pseudo_orbit_with_tolerance(germ, z, steps, escape, ptol)
            } else {
                pseudo_orbit_with_multiplier(germ, lambda, z, steps, escape, ptol)
            }
        })
        .collect();
    let rows: Vec<OrbitRow> = orbits
        .iter()
        .map(|orb| {
            let (outcome, period, escaped_at) = match orb.outcome {
                OrbitOutcome::Periodic { period } => ("periodic", Some(period), None),
                OrbitOutcome::Escaped { step } => ("escaped", None, Some(step)),
                OrbitOutcome::Undecided => ("undecided", None, None),
            };
            OrbitRow {
                seed: complex(orb.seed),
                outcome,
                period,
                escaped_at,
                iterations: orb.iterates.len() - 1,
                tol: Num(orb.tolerance),
            }
        })
        .collect();
    let max_period = rows.iter().filter_map(|r| r.period).max();
    let all_periodic = rows.iter().all(|r| r.period.is_some());
    let periodic = rows.iter().filter(|r| r.period.is_some()).count();
    let pseudo = Stage::ok(
        match max_period {
            Some(p) => format!("{periodic} of {} seeds periodic, max period {p}", rows.len()),
            None => format!("no periodic seed among {} within {steps} steps", rows.len()),
        },
        OrbitsOut {
            steps,
            escape_radius: Num(escape),
            max_period,
            all_periodic,
            rows,
        },
    );
    GermSections {
        germ: germ_out,
        finite_order: finite,
        pseudo_orbits: pseudo,
    }
}

fn germ_summary(s: &GermSections) -> String {
    format!(
        "finite order: {}; pseudo-orbits: {}",
        s.finite_order.summary, s.pseudo_orbits.summary
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::parse_spec_str;

    const GERM: &str = r#"{"kind": "germ", "truncation": 8, "coefficients": [[1, "-1"]]}"#;

    #[test]
    fn default_germ_seeds_ring_the_origin() {
        let Problem::Germ(g) = parse_spec_str(GERM).unwrap().problem else {
            panic!()
        };
        let seeds = germ_seeds(&g, &Overrides::default());
        assert_eq!(seeds.len(), GERM_SEED_ANGLES);
        assert!(seeds.iter().all(|z| (z.norm() - DEFAULT_GERM_RADII[0]).abs() < 1e-15));
        let two = Overrides {
            radii: Some(vec![0.1, 0.2]),
            ..Overrides::default()
        };
        assert_eq!(germ_seeds(&g, &two).len(), 2 * GERM_SEED_ANGLES);
    }

    #[test]
    fn missing_return_is_not_a_numeric_failure() {
        let s: Stage<()> = flow_error_stage(FlowError::NoReturn { r: 0.1, t: 2.0 });
        assert_eq!(s.status, StageStatus::NotApplicable);
        let s: Stage<()> = flow_error_stage(FlowError::StepUnderflow { t: 1.0, h: 1e-300 });
        assert!(s.is_failed());
    }

    #[test]
    fn command_must_match_kind() {
        let spec = parse_spec_str(GERM).unwrap();
        let err = run(Command::ReturnMap, &spec, GERM.as_bytes(), &Overrides::default()).unwrap_err();
        assert!(matches!(err, RunError::WrongKind { .. }));
        let report = run(Command::Germ, &spec, GERM.as_bytes(), &Overrides::default()).unwrap();
        assert_eq!(report.status, "ok");
        let Sections::Germ(g) = &report.sections else {
            panic!()
        };
        assert_eq!(g.finite_order.value().unwrap().order, Some(2));
        assert_eq!(g.pseudo_orbits.value().unwrap().max_period, Some(2));
    }

    #[test]
    fn dump_needs_a_real_field() {
        let spec = parse_spec_str(GERM).unwrap();
        let o = Overrides {
            dump_orbits: Some(PathBuf::from("orbits")),
            ..Overrides::default()
        };
        assert!(run(Command::Germ, &spec, GERM.as_bytes(), &o).is_err());
    }
}
