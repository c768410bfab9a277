//! Problem-spec files: JSON in, validated exact data out.

use std::path::Path;

use centerfocus_core::germ::{Germ1, RootOfUnity};
use centerfocus_core::series::{Coefficient, OneForm2, Poly2, VectorField2};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> SpecError {
    SpecError::Validation {
        field: field.into(),
        message: message.into(),
    }
}

type RawTerm = (u32, u32, String);

#[derive(Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum Kind {
    RealField,
    ComplexForm,
    Germ,
}

/// One flat record for every kind, so that serde reports line and column
/// for every type error; kind-specific checks happen afterwards.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    kind: Kind,
    name: Option<String>,
    truncation: u32,
    dx: Option<Vec<RawTerm>>,
    dy: Option<Vec<RawTerm>>,
    first_integral: Option<Vec<RawTerm>>,
    coefficients: Option<Vec<(u32, String)>>,
    multiplier_root: Option<(i64, i64)>,
    #[serde(default)]
    analysis: RawAnalysis,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnalysis {
    order: Option<u32>,
    radii: Option<Vec<f64>>,
    tol: Option<f64>,
    section: Option<SectionSpec>,
    bounded_order: Option<BoundedOrderSpec>,
    slice: Option<SliceSpec>,
    k_max: Option<u32>,
    seeds: Option<Vec<[f64; 2]>>,
    orbit_steps: Option<u32>,
    escape_radius: Option<f64>,
    period_tol: Option<f64>,
}

impl RawAnalysis {
    fn present(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let mut note = |set: bool, name| {
            if set {
                out.push(name)
            }
        };
        note(self.order.is_some(), "order");
        note(self.radii.is_some(), "radii");
        note(self.tol.is_some(), "tol");
        note(self.section.is_some(), "section");
        note(self.bounded_order.is_some(), "bounded_order");
        note(self.slice.is_some(), "slice");
        note(self.k_max.is_some(), "k_max");
        note(self.seeds.is_some(), "seeds");
        note(self.orbit_steps.is_some(), "orbit_steps");
        note(self.escape_radius.is_some(), "escape_radius");
        note(self.period_tol.is_some(), "period_tol");
        out
    }

    fn only(&self, kind: &str, allowed: &[&str]) -> Result<(), SpecError> {
        match self.present().into_iter().find(|f| !allowed.contains(f)) {
            Some(f) => Err(invalid(format!("analysis.{f}"), format!("not used by kind `{kind}`"))),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SectionSpec {
    pub direction: [f64; 2],
    pub length: f64,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BoundedOrderSpec {
    pub k: usize,
    pub points: Vec<[f64; 2]>,
    pub section: Option<SectionSpec>,
    pub t_budget: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RealAnalysis {
    pub order: Option<u32>,
    pub radii: Option<Vec<f64>>,
    pub tol: Option<f64>,
    pub section: Option<SectionSpec>,
    pub bounded_order: Option<BoundedOrderSpec>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SliceSpec {
    pub radii: Option<Vec<f64>>,
    pub angles: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ComplexAnalysis {
    pub order: Option<u32>,
    pub slice: Option<SliceSpec>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GermAnalysis {
    pub k_max: Option<u32>,
    pub seeds: Option<Vec<[f64; 2]>>,
    /// Seed moduli; each is sampled at eight equally spaced angles.
    pub radii: Option<Vec<f64>>,
    pub orbit_steps: Option<u32>,
    pub escape_radius: Option<f64>,
    pub period_tol: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RealFieldSpec {
    pub field: VectorField2,
    pub analysis: RealAnalysis,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexFormSpec {
    pub form: OneForm2,
    /// Present when the form was given as `dF`.
    pub first_integral: Option<Poly2>,
    pub analysis: ComplexAnalysis,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GermSpec {
    /// When the multiplier is a root of unity outside `Q(i)`, the linear
    /// coefficient stored here is a placeholder `1` and `multiplier_root`
    /// carries the real value.
    pub germ: Germ1,
    pub multiplier_root: Option<RootOfUnity>,
    pub analysis: GermAnalysis,
}

impl GermSpec {
    /// True when the germ's linear coefficient is its actual multiplier.
    pub fn exact_multiplier(&self) -> bool {
        self.multiplier_root
            .is_none_or(|r| r.to_coefficient().is_some())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Problem {
    RealField(RealFieldSpec),
    ComplexForm(ComplexFormSpec),
    Germ(GermSpec),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub name: Option<String>,
    pub truncation: u32,
    pub problem: Problem,
}

impl ProblemSpec {
    pub fn kind(&self) -> &'static str {
        match self.problem {
            Problem::RealField(_) => "real_field",
            Problem::ComplexForm(_) => "complex_form",
            Problem::Germ(_) => "germ",
        }
    }
}

fn coefficient(field: &str, text: &str) -> Result<Coefficient, SpecError> {
    text.parse().map_err(|e| invalid(field, format!("{e}")))
}

fn series(field: &str, truncation: u32, terms: &[RawTerm]) -> Result<Poly2, SpecError> {
    let mut out = Poly2::zero(truncation);
    for (k, (i, j, c)) in terms.iter().enumerate() {
        let here = format!("{field}[{k}]");
        if i + j > truncation {
            return Err(invalid(
                here,
                format!("exponent ({i}, {j}) has degree {} above truncation {truncation}", i + j),
            ));
        }
        let c = coefficient(&here, c)?;
        let sum = &out.coeff(*i, *j) + &c;
        out.set_coeff(*i, *j, sum);
    }
    Ok(out)
}

pub fn check_positive(field: &str, v: f64) -> Result<(), SpecError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be a positive finite number, got {v}")))
    }
}

pub fn check_radii(field: &str, radii: &[f64]) -> Result<(), SpecError> {
    if radii.is_empty() {
        return Err(invalid(field, "must not be empty"));
    }
    for (k, &r) in radii.iter().enumerate() {
        check_positive(&format!("{field}[{k}]"), r)?;
    }
    Ok(())
}

/// Return-map radii: positive and strictly decreasing.
pub fn check_decreasing_radii(field: &str, radii: &[f64]) -> Result<(), SpecError> {
    check_radii(field, radii)?;
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid(field, "must be strictly decreasing"));
    }
    Ok(())
}

fn check_section(field: &str, s: &SectionSpec) -> Result<(), SpecError> {
    check_positive(&format!("{field}.length"), s.length)?;
    let [a, b] = s.direction;
    if !(a.is_finite() && b.is_finite()) || a.hypot(b) == 0.0 {
        return Err(invalid(format!("{field}.direction"), "must be a nonzero vector"));
    }
    Ok(())
}

fn validate_real(a: &RealAnalysis) -> Result<(), SpecError> {
    if let Some(r) = &a.radii {
        check_decreasing_radii("analysis.radii", r)?;
    }
    if let Some(t) = a.tol {
        check_positive("analysis.tol", t)?;
    }
    if let Some(s) = &a.section {
        check_section("analysis.section", s)?;
    }
    if let Some(b) = &a.bounded_order {
        if b.k == 0 {
            return Err(invalid("analysis.bounded_order.k", "must be at least 1"));
        }
        if b.points.is_empty() {
            return Err(invalid("analysis.bounded_order.points", "must not be empty"));
        }
        if let Some(s) = &b.section {
            check_section("analysis.bounded_order.section", s)?;
        }
        if let Some(t) = b.t_budget {
            check_positive("analysis.bounded_order.t_budget", t)?;
        }
    }
    Ok(())
}

fn validate_complex(a: &ComplexAnalysis) -> Result<(), SpecError> {
    if let Some(s) = &a.slice {
        if let Some(r) = &s.radii {
            check_radii("analysis.slice.radii", r)?;
        }
        if s.angles == Some(0) {
            return Err(invalid("analysis.slice.angles", "must be at least 1"));
        }
    }
    Ok(())
}

fn validate_germ(a: &GermAnalysis) -> Result<(), SpecError> {
    if a.k_max == Some(0) {
        return Err(invalid("analysis.k_max", "must be at least 1"));
    }
    if let Some(r) = &a.radii {
        check_radii("analysis.radii", r)?;
    }
    if let Some(seeds) = &a.seeds {
        if seeds.is_empty() {
            return Err(invalid("analysis.seeds", "must not be empty"));
        }
    }
    if let Some(r) = a.escape_radius {
        check_positive("analysis.escape_radius", r)?;
    }
    if let Some(t) = a.period_tol {
        check_positive("analysis.period_tol", t)?;
    }
    Ok(())
}

fn forbid<T>(value: &Option<T>, field: &str, kind: &str) -> Result<(), SpecError> {
    match value {
        Some(_) => Err(invalid(field, format!("not used by kind `{kind}`"))),
        None => Ok(()),
    }
}

fn require<T>(value: Option<T>, field: &str, kind: &str) -> Result<T, SpecError> {
    value.ok_or_else(|| invalid(field, format!("required for kind `{kind}`")))
}

fn build(raw: RawSpec) -> Result<ProblemSpec, SpecError> {
    let RawSpec {
        kind,
        name,
        truncation,
        dx,
        dy,
        first_integral,
        coefficients,
        multiplier_root,
        analysis: a,
    } = raw;
    let problem = match kind {
        Kind::RealField => {
            let k = "real_field";
            forbid(&first_integral, "first_integral", k)?;
            forbid(&coefficients, "coefficients", k)?;
            forbid(&multiplier_root, "multiplier_root", k)?;
            a.only(k, &["order", "radii", "tol", "section", "bounded_order"])?;
            let p = series("dx", truncation, &require(dx, "dx", k)?)?;
            let q = series("dy", truncation, &require(dy, "dy", k)?)?;
            if !(p.is_real() && q.is_real()) {
                return Err(invalid("dx/dy", "a real field needs real coefficients"));
            }
            let analysis = RealAnalysis {
                order: a.order,
                radii: a.radii,
                tol: a.tol,
                section: a.section,
                bounded_order: a.bounded_order,
            };
            validate_real(&analysis)?;
            Problem::RealField(RealFieldSpec {
                field: VectorField2::new(p, q),
                analysis,
            })
        }
        Kind::ComplexForm => {
            let k = "complex_form";
            forbid(&coefficients, "coefficients", k)?;
            forbid(&multiplier_root, "multiplier_root", k)?;
            a.only(k, &["order", "slice"])?;
            let (form, first_integral) = match (dx, dy, first_integral) {
                (None, None, Some(f)) => {
                    let f = series("first_integral", truncation + 1, &f)?.to_complex();
                    (OneForm2::exact(&f), Some(f))
                }
                (Some(a), Some(b), None) => {
                    let a = series("dx", truncation, &a)?;
                    let b = series("dy", truncation, &b)?;
                    (OneForm2::new(a, b).to_complex(), None)
                }
                _ => {
                    return Err(invalid(
                        "dx/dy/first_integral",
                        "give either both `dx` and `dy`, or `first_integral` alone",
                    ))
                }
            };
            let analysis = ComplexAnalysis {
                order: a.order,
                slice: a.slice,
            };
            validate_complex(&analysis)?;
            Problem::ComplexForm(ComplexFormSpec {
                form,
                first_integral,
                analysis,
            })
        }
        Kind::Germ => {
            let k = "germ";
            forbid(&dx, "dx", k)?;
            forbid(&dy, "dy", k)?;
            forbid(&first_integral, "first_integral", k)?;
            a.only(k, &["k_max", "seeds", "radii", "orbit_steps", "escape_radius", "period_tol"])?;
            let coefficients = require(coefficients, "coefficients", k)?;
            let root = match multiplier_root {
                Some((_, q)) if q <= 0 => {
                    return Err(invalid("multiplier_root", "denominator must be positive"))
                }
                Some((p, q)) => Some(RootOfUnity { p, q }),
                None => None,
            };
            let mut terms = Vec::with_capacity(coefficients.len() + 1);
            for (n, (d, c)) in coefficients.iter().enumerate() {
                let here = format!("coefficients[{n}]");
                if *d == 0 || *d > truncation {
                    return Err(invalid(here, format!("degree {d} outside 1..={truncation}")));
                }
                if *d == 1 && root.is_some() {
                    return Err(invalid(
                        here,
                        "the linear coefficient is implied by `multiplier_root`",
                    ));
                }
                terms.push((*d, coefficient(&here, c)?));
            }
            if let Some(r) = root {
                terms.push((1, r.to_coefficient().unwrap_or_else(|| Coefficient::from_int(1))));
            }
            let germ = Germ1::new(truncation, terms)
                .map_err(|e| invalid("coefficients", e.to_string()))?;
            let analysis = GermAnalysis {
                k_max: a.k_max,
                seeds: a.seeds,
                radii: a.radii,
                orbit_steps: a.orbit_steps,
                escape_radius: a.escape_radius,
                period_tol: a.period_tol,
            };
            validate_germ(&analysis)?;
            Problem::Germ(GermSpec {
                germ,
                multiplier_root: root,
                analysis,
            })
        }
    };
    Ok(ProblemSpec {
        name,
        truncation,
        problem,
    })
}

/// Parses and validates a spec document.
pub fn parse_spec_str(text: &str) -> Result<ProblemSpec, SpecError> {
    let raw: RawSpec = serde_json::from_str(text).map_err(|e| SpecError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    build(raw)
}

pub fn parse_spec(path: &Path) -> Result<ProblemSpec, SpecError> {
    let text = std::fs::read_to_string(path).map_err(|source| SpecError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_spec_str(&text)
}
