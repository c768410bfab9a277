//! Report document. Every float goes through [`Num`] and is written with 17
//! significant digits; exact values are strings in the spec's coefficient
//! syntax.

use centerfocus_core::series::{Coefficient, Matrix2, OneForm2, Poly2, VectorField2};
use num_complex::Complex64;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

pub const SCHEMA_VERSION: u32 = 1;

/// A binary64 printed as `d.dddddddddddddddde±x`; non-finite values become
/// `null` and negative zero prints as zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Num(pub f64);

impl Num {
    pub fn text(self) -> Option<String> {
        let v = if self.0 == 0.0 { 0.0 } else { self.0 };
        v.is_finite().then(|| format!("{v:.16e}"))
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.text() {
            Some(t) => RawValue::from_string(t)
                .map_err(serde::ser::Error::custom)?
                .serialize(s),
            None => s.serialize_none(),
        }
    }
}

/// `[re, im]`.
pub fn complex(z: Complex64) -> [Num; 2] {
    [Num(z.re), Num(z.im)]
}

pub fn point(p: [f64; 2]) -> [Num; 2] {
    [Num(p[0]), Num(p[1])]
}

/// `[i, j, "coefficient"]`, in exponent order.
pub type Term = (u32, u32, String);

pub fn terms(p: &Poly2) -> Vec<Term> {
    p.terms()
        .map(|(&(i, j), c)| (i, j, c.to_string()))
        .collect()
}

pub fn matrix(m: &Matrix2) -> [[String; 2]; 2] {
    m.clone().map(|row| row.map(|c| c.to_string()))
}

pub fn exact(c: &Coefficient) -> String {
    c.to_string()
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesOut {
    pub truncation: u32,
    pub terms: Vec<Term>,
}

impl From<&Poly2> for SeriesOut {
    fn from(p: &Poly2) -> Self {
        Self {
            truncation: p.truncation(),
            terms: terms(p),
        }
    }
}

/// A vector field `dx ∂x + dy ∂y` or a 1-form `dx·dx + dy·dy`, in the spec
/// layout.
#[derive(Clone, Debug, Serialize)]
pub struct PairOut {
    pub truncation: u32,
    pub dx: Vec<Term>,
    pub dy: Vec<Term>,
}

impl From<&VectorField2> for PairOut {
    fn from(f: &VectorField2) -> Self {
        Self {
            truncation: f.truncation(),
            dx: terms(f.p()),
            dy: terms(f.q()),
        }
    }
}

impl From<&OneForm2> for PairOut {
    fn from(f: &OneForm2) -> Self {
        Self {
            truncation: f.truncation(),
            dx: terms(f.a()),
            dy: terms(f.b()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Ok,
    /// A numeric computation failed; the exit code is 2.
    Failed,
    /// A hypothesis of the stage does not hold for this input.
    NotApplicable,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct Stage<T> {
    pub status: StageStatus,
    pub summary: String,
    pub error: Option<String>,
    pub result: Option<T>,
}

impl<T> Stage<T> {
    pub fn ok(summary: impl Into<String>, result: T) -> Self {
        Self {
            status: StageStatus::Ok,
            summary: summary.into(),
            error: None,
            result: Some(result),
        }
    }

    pub fn failed(error: impl ToString) -> Self {
        let error = error.to_string();
        Self {
            status: StageStatus::Failed,
            summary: format!("failed: {error}"),
            error: Some(error),
            result: None,
        }
    }

    pub fn not_applicable(error: impl ToString) -> Self {
        let error = error.to_string();
        Self {
            status: StageStatus::NotApplicable,
            summary: format!("not applicable: {error}"),
            error: Some(error),
            result: None,
        }
    }

    pub fn skipped(reason: impl Into<String>) -> Self {
        Self {
            status: StageStatus::Skipped,
            summary: reason.into(),
            error: None,
            result: None,
        }
    }

    pub fn is_failed(&self) -> bool {
        self.status == StageStatus::Failed
    }

    pub fn value(&self) -> Option<&T> {
        self.result.as_ref()
    }
}

/// Every tolerance the run could have used, whether or not a stage used it.
#[derive(Clone, Debug, Serialize)]
pub struct Tolerances {
    pub integrator: Num,
    pub event_time: Num,
    pub transversality: Num,
    pub periodicity_relative: Num,
    pub crossing_dedup_relative: Num,
    pub slice_sample: Num,
    pub slice_residual: Num,
    pub slice_step: Num,
    pub germ_period: Num,
}

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    /// RFC 3339, UTC; the only field that changes between identical runs.
    pub generated_at: String,
    pub input_sha256: String,
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command: String,
    pub tolerances: Tolerances,
}

// ---- real fields -------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct NormalizationOut {
    pub change_matrix: [[String; 2]; 2],
    pub time_rescale: String,
    pub normalized: PairOut,
}

#[derive(Clone, Debug, Serialize)]
pub struct ObstructionOut {
    pub index: u32,
    pub degree: u32,
    pub value: String,
    pub approx: Num,
}

#[derive(Clone, Debug, Serialize)]
pub struct LyapunovOut {
    pub order_requested: u32,
    pub truncation_degree: u32,
    pub obstructions: Vec<ObstructionOut>,
    pub first_nonzero: Option<u32>,
    pub first_integral: SeriesOut,
}

#[derive(Clone, Debug, Serialize)]
pub struct MorseOut {
    pub critical: bool,
    pub nondegenerate: bool,
    pub definite: Option<bool>,
    pub hessian_det: String,
    pub center_compatible: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerdictOut {
    pub label: &'static str,
    pub order: Option<u32>,
    pub index: Option<u32>,
    pub degree: Option<u32>,
    pub eta: Option<String>,
    pub unstable: Option<bool>,
    pub reason: Option<String>,
    pub summary: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SectionOut {
    pub direction: [Num; 2],
    pub length: Num,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReturnRow {
    pub r_in: Num,
    pub r_out: Num,
    /// `P(r) − r`.
    pub residual: Num,
    pub relative_residual: Num,
    pub crossings: usize,
    pub time: Num,
    pub tol: Num,
    pub periodicity_tol: Num,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReturnMapOut {
    pub section: SectionOut,
    pub verdict: &'static str,
    pub rows: Vec<ReturnRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundedOrderRow {
    pub point: [Num; 2],
    pub count: usize,
    pub bound: usize,
    pub within_bound: bool,
    pub budget_exhausted: bool,
    pub parameters: Vec<Num>,
    pub tol: Num,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundedOrderOut {
    pub section: SectionOut,
    pub t_budget: Num,
    pub rows: Vec<BoundedOrderRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CombinedOut {
    pub symbolic: &'static str,
    pub numeric: Option<&'static str>,
    /// `null` when either side is unavailable.
    pub agreement: Option<bool>,
    pub caveat: &'static str,
    pub summary: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RealSections {
    pub input: PairOut,
    pub normalization: Stage<NormalizationOut>,
    pub lyapunov: Stage<LyapunovOut>,
    pub morse: Stage<MorseOut>,
    pub verdict: Option<VerdictOut>,
    pub return_map: Stage<ReturnMapOut>,
    pub bounded_order: Stage<BoundedOrderOut>,
    pub combined: Option<CombinedOut>,
}

// ---- complex forms -----------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct SiegelOut {
    /// True when the form came from complexifying a real field.
    pub complexified: bool,
    pub change_matrix: Option<[[String; 2]; 2]>,
    pub is_siegel: bool,
    pub form: PairOut,
}

#[derive(Clone, Debug, Serialize)]
pub struct DivisorPointOut {
    pub chart: &'static str,
    pub location: [Num; 2],
    pub exact_location: Option<String>,
    pub multiplicity: u32,
    /// `[[re, im], [re, im]]` as (transverse, along the divisor).
    pub eigenvalues: Option<[[Num; 2]; 2]>,
    pub eigenvalue_ratio: Option<[Num; 2]>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlowupOut {
    pub order: u32,
    pub divided_power: u32,
    pub divisor_invariant: bool,
    pub dicritical: bool,
    pub chart_t: PairOut,
    pub chart_s: PairOut,
    pub singularities_on_e: Vec<DivisorPointOut>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IntegralOut {
    pub order_requested: u32,
    pub truncation_degree: u32,
    pub first_integral: SeriesOut,
    pub obstructions: Vec<ObstructionOut>,
    pub first_nonzero: Option<u32>,
    pub formal_first_integral: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorOut {
    pub f: SeriesOut,
    pub g: SeriesOut,
    pub branch_f: SeriesOut,
    pub branch_g: SeriesOut,
    pub unit: SeriesOut,
    pub general_position: bool,
    /// `branch_f · branch_g · unit` agrees with `F` to truncation.
    pub reconstruction_exact: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SliceRow {
    pub x: [Num; 2],
    pub y: [Num; 2],
    pub fg: [Num; 2],
    pub contact_order: u8,
    pub tol: Num,
}

#[derive(Clone, Debug, Serialize)]
pub struct SliceOut {
    pub tol: Num,
    pub seeds: usize,
    pub failures: usize,
    pub sample_count: usize,
    pub max_abs_imag_fg: Num,
    pub min_real_fg: Num,
    pub contact_order_one: bool,
    pub passed: bool,
    pub samples: Vec<SliceRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComplexSections {
    pub siegel: Stage<SiegelOut>,
    pub blowup: Stage<BlowupOut>,
    pub first_integral: Stage<IntegralOut>,
    pub factor: Stage<FactorOut>,
    pub slice: Stage<SliceOut>,
}

// ---- germs -------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct GermOut {
    pub truncation: u32,
    /// `[degree, "coefficient"]`; the linear term is omitted when the
    /// multiplier is only known as a root of unity.
    pub coefficients: Vec<(u32, String)>,
    pub multiplier: Option<String>,
    pub multiplier_root: Option<[i64; 2]>,
    pub multiplier_approx: [Num; 2],
    pub multiplier_order: Option<u32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FiniteOrderOut {
    pub k_max: u32,
    /// `exact` when decided in `Q(i)`; `numeric_only` when the multiplier
    /// has no exact representation.
    pub method: &'static str,
    pub order: Option<u32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitRow {
    pub seed: [Num; 2],
    pub outcome: &'static str,
    pub period: Option<u32>,
    pub escaped_at: Option<u32>,
    pub iterations: usize,
    pub tol: Num,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitsOut {
    pub steps: u32,
    pub escape_radius: Num,
    pub max_period: Option<u32>,
    pub all_periodic: bool,
    pub rows: Vec<OrbitRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GermSections {
    pub germ: GermOut,
    pub finite_order: Stage<FiniteOrderOut>,
    pub pseudo_orbits: Stage<OrbitsOut>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum Sections {
    Real(Box<RealSections>),
    Complex(Box<ComplexSections>),
    Germ(Box<GermSections>),
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub kind: &'static str,
    pub name: Option<String>,
    pub truncation: u32,
    pub provenance: Provenance,
    /// `ok` or `numeric_failure`.
    pub status: &'static str,
    pub summary: String,
    pub sections: Sections,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        let v = serde_json::to_string(&[Num(0.1), Num(-2.5), Num(0.0), Num(f64::NAN)]).unwrap();
        assert_eq!(
            v,
            "[1.0000000000000001e-1,-2.5000000000000000e0,0.0000000000000000e0,null]"
        );
        assert_eq!(Num(-0.0).text().unwrap(), "0.0000000000000000e0");
        let back: Vec<Option<f64>> = serde_json::from_str(&v).unwrap();
        assert_eq!(back[0], Some(0.1));
    }

    #[test]
    fn stage_layout() {
        let s: Stage<u32> = Stage::skipped("not requested");
        assert_eq!(
            serde_json::to_string(&s).unwrap(),
            r#"{"status":"skipped","summary":"not requested","error":null,"result":null}"#
        );
    }
}
