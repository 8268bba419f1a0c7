//! Versioned run report and its deterministic JSON encoding.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::config::{BellModelType, DynamicsType, KernelType, Source, Tolerances};
use crate::Command;

pub const REPORT_SCHEMA: &str = "fragile-report/1";

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: &'static str,
    pub command: Command,
    pub seed: u64,
    pub tolerances: Tolerances,
    /// True iff every executed check passed.
    pub pass: bool,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validate: Option<ValidateSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_points: Option<FixedPointsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operators: Option<OperatorsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequential: Option<SequentialSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evolve: Option<EvolveSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chsh: Option<ChshSection>,
}

impl RunReport {
    pub fn new(command: Command, seed: u64, tolerances: Tolerances, warnings: Vec<String>) -> Self {
        Self {
            schema_version: REPORT_SCHEMA,
            command,
            seed,
            tolerances,
            pass: true,
            warnings,
            validate: None,
            fixed_points: None,
            operators: None,
            sequential: None,
            evolve: None,
            chsh: None,
        }
    }

    /// Recomputes the overall flag from the sections.
    pub fn finish(mut self) -> Self {
        self.pass = [
            self.fixed_points.as_ref().map(|s| s.pass),
            self.operators.as_ref().map(|s| s.pass),
            self.sequential.as_ref().map(|s| s.pass),
            self.evolve.as_ref().map(|s| s.pass),
            self.chsh.as_ref().map(|s| s.pass),
        ]
        .into_iter()
        .flatten()
        .all(|p| p);
        self
    }

    pub fn to_json(&self) -> String {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, FullPrecision::default());
        self.serialize(&mut ser).expect("report serialization cannot fail");
        out.push(b'\n');
        String::from_utf8(out).expect("serde_json writes UTF-8")
    }
}

/// Pretty JSON with every float written to 17 significant digits.
#[derive(Default)]
pub struct FullPrecision {
    pretty: PrettyFormatter<'static>,
}

impl Formatter for FullPrecision {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.end_object_value(writer)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidateSection {
    pub space_size: usize,
    pub labels: Option<Vec<String>>,
    pub observables: Vec<ObservableSummary>,
    pub kernels: Vec<KernelSummary>,
    pub dynamics: Option<DynamicsSummary>,
    pub state: StateSummary,
    pub bell: Option<BellSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ObservableSummary {
    pub name: String,
    pub outcomes: Vec<f64>,
    pub multiplicities: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelSummary {
    pub observable: String,
    #[serde(rename = "type")]
    pub kind: KernelType,
    pub source: Source,
    pub seed: Option<u64>,
    pub num_perms: Option<usize>,
    /// Largest probability mass leaving an outcome class.
    pub max_leakage: f64,
    /// Largest deviation of a within-class block row sum from one.
    pub max_block_row_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DynamicsSummary {
    #[serde(rename = "type")]
    pub kind: DynamicsType,
    pub dt: f64,
    pub map: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StateSummary {
    pub source: Source,
    pub probs: Vec<f64>,
    pub sharp: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BellSummary {
    pub model: BellModelType,
    pub seed: Option<u64>,
    pub size: usize,
    pub grid_points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPointsSection {
    pub tolerance: f64,
    pub kernels: Vec<FixedPointEntry>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPointEntry {
    pub observable: String,
    #[serde(rename = "type")]
    pub kind: KernelType,
    pub source: Source,
    pub outcomes: Vec<f64>,
    pub residuals: Vec<f64>,
    pub passes: Vec<bool>,
    pub max_residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OperatorsSection {
    pub observables: Vec<OperatorEntry>,
    pub commutators: Vec<CommutatorEntry>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OperatorEntry {
    pub observable: String,
    pub basis: String,
    pub kernel: KernelType,
    pub outcomes: Vec<f64>,
    pub transfer_identity_defect: f64,
    pub transfer_pass: bool,
    /// Rows of the observable operator in its own outcome basis.
    pub matrix: Vec<Vec<f64>>,
    /// Largest `|A − diag(outcomes)|` entry.
    pub diagonal_error: f64,
    pub eigenvalues: Option<Vec<f64>>,
    pub max_eigen_residual: Option<f64>,
    /// Largest `|eigenvalue − outcome|` after sorting both.
    pub spectrum_error: Option<f64>,
    pub eigen_pass: bool,
    pub complex: Option<ComplexEntry>,
    pub trace_rule: Option<TraceRuleEntry>,
    pub errors: Vec<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComplexEntry {
    pub basis: String,
    pub hermiticity_defect: f64,
    pub spectrum_error: f64,
    /// Reported only; transfer matrices of non-admissible kernels need not be unitary.
    pub transfer_unitarity_defect: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceRuleEntry {
    pub outcome_probs: Vec<f64>,
    pub trace: f64,
    pub classical: f64,
    pub difference: f64,
    pub density_hermiticity_defect: f64,
    pub density_trace: f64,
    pub density_min_eigenvalue: f64,
    pub purity: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CommutatorEntry {
    pub first: String,
    pub second: String,
    pub basis: String,
    pub frobenius_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SequentialSection {
    pub state_source: Source,
    pub state: Vec<f64>,
    pub repeatability: Vec<RepeatabilityEntry>,
    pub pairs: Vec<PairEntry>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RepeatabilityEntry {
    pub observable: String,
    pub protocol: String,
    pub max_off_diagonal: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairEntry {
    pub first: String,
    pub second: String,
    pub with_kernels: JointComparison,
    pub non_fragile: JointComparison,
}

#[derive(Debug, Clone, Serialize)]
pub struct JointComparison {
    pub protocol: String,
    /// `forward[i][j] = P(first = a_i, then second = b_j)`.
    pub forward: Vec<Vec<f64>>,
    /// `reverse[j][i] = P(second = b_j, then first = a_i)`.
    pub reverse: Vec<Vec<f64>>,
    /// Total-variation distance between the two orders.
    pub order_gap: f64,
    /// Only the non-fragile comparison is required to be order-symmetric.
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolveSection {
    #[serde(rename = "type")]
    pub kind: DynamicsType,
    pub dt: f64,
    pub basis: String,
    pub map: Option<Vec<usize>>,
    pub unitarity_defect: f64,
    pub unitarity_pass: bool,
    pub generator: Option<GeneratorEntry>,
    pub transport: Option<TransportEntry>,
    pub outcome_propagators: Vec<OutcomePropagatorEntry>,
    pub errors: Vec<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneratorEntry {
    /// Ascending, in `(−π, π]`.
    pub eigenphases: Vec<f64>,
    pub hermiticity_defect: f64,
    pub round_trip_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransportEntry {
    pub initial: Vec<f64>,
    pub evolved_diagonal: Vec<f64>,
    pub kernel_evolved: Vec<f64>,
    pub max_error: f64,
    pub purity_before: f64,
    pub purity_after: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutcomePropagatorEntry {
    pub observable: String,
    pub basis: String,
    /// Reported only; coarse-grained propagators are generally not orthogonal.
    pub unitarity_defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChshSection {
    pub model: BellModelType,
    pub local: bool,
    pub seed: Option<u64>,
    pub oracle: OracleEntry,
    pub result: ChshEntry,
    /// `max |E + cos(a − b)|` over the four setting pairs, singlet only.
    pub singlet_identity_error: Option<f64>,
    pub grid: Option<GridEntry>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleEntry {
    pub max_abs_s: f64,
    pub strategies_visited: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChshEntry {
    /// `[a, a′, b, b′]`.
    pub settings: [f64; 4],
    /// `[E(a,b), E(a,b′), E(a′,b), E(a′,b′)]`.
    pub correlations: [f64; 4],
    pub s: f64,
    pub abs_s: f64,
    pub violation: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridEntry {
    pub points: usize,
    pub max_abs_s: f64,
    pub top: Vec<ChshEntry>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Sample {
        x: f64,
        v: Vec<f64>,
        n: Option<f64>,
    }

    #[test]
    fn floats_keep_full_precision() {
        let sample = Sample {
            x: 0.1,
            v: vec![-std::f64::consts::FRAC_1_SQRT_2, 0.0, 1e-300],
            n: Some(f64::NAN),
        };
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, FullPrecision::default());
        sample.serialize(&mut ser).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("1.0000000000000001e-1"), "{text}");
        assert!(text.contains("-7.0710678118654757e-1"), "{text}");
        assert!(text.contains("\"n\": null"), "{text}");

        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["x"].as_f64().unwrap().to_bits(), 0.1f64.to_bits());
        assert_eq!(back["v"][0].as_f64().unwrap(), -std::f64::consts::FRAC_1_SQRT_2);
        assert_eq!(back["v"][2].as_f64().unwrap(), 1e-300);
    }
}
