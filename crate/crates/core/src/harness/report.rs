//! Experiment reports. Everything here is plain data with a stable
//! serialization; no timestamps or host details are recorded.

use serde::{Deserialize, Serialize};

use super::oracle::OracleId;
use super::problem::ProblemSpec;
use crate::invariant_schemes::{Termination, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Solve,
    Convergence,
    Comparison,
    Singularity,
    PropertySuite,
}

/// One integrated trajectory with its configuration and error column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub label: String,
    pub spec: ProblemSpec,
    pub trajectory: Trajectory,
    pub oracle: Option<OracleId>,
    /// Absolute error of each sample against `oracle`.
    pub err_vs_oracle: Vec<Option<f64>>,
    /// Largest entry of `err_vs_oracle` over the x-range the report compares on.
    pub max_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub h: f64,
    /// Steps to reach the common endpoint.
    pub steps: usize,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSummary {
    /// x at which all errors are measured.
    pub x_end: f64,
    pub points: Vec<ConvergencePoint>,
    /// Least-squares slope of `ln error` against `ln h`.
    pub slope: Option<f64>,
    /// RMS residual of that fit.
    pub fit_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonEntry {
    pub label: String,
    pub max_error: Option<f64>,
    /// Largest x reached.
    pub max_x: f64,
    pub steps: usize,
    pub termination: Termination,
    /// `max_error / max_error` of the first entry.
    pub ratio_to_first: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub reference: OracleId,
    /// Upper end of the x-range shared by all runs and the reference.
    pub x_common: f64,
    pub entries: Vec<ComparisonEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularityOutcome {
    Found,
    NoSingularity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularitySummary {
    pub outcome: SingularityOutcome,
    /// Closest approach (fold) or the x where the run stopped at a pole.
    pub estimate: Option<f64>,
    /// Fold of the reference where known.
    pub reference_x: Option<f64>,
    /// `|estimate − reference_x| / reference_x`.
    pub relative_offset: Option<f64>,
    /// Largest `|Δy/Δx|` between consecutive samples.
    pub max_slope: f64,
    /// Post-fold samples at distance ≥ `min_distance` from the fold that were
    /// compared with the second branch.
    pub post_fold_compared: usize,
    pub min_distance: f64,
    /// Largest relative error of those samples against the second branch.
    pub post_fold_max_rel_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    pub trials: usize,
    pub max_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertySummary {
    pub seed: u64,
    pub checks: Vec<PropertyCheck>,
    pub max_violation: f64,
    pub all_passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub tool_version: String,
    /// Set when a reference was unavailable and errors are missing.
    pub partial: bool,
    pub notes: Vec<String>,
    pub runs: Vec<RunRecord>,
    pub convergence: Option<ConvergenceSummary>,
    pub comparison: Option<ComparisonSummary>,
    pub singularity: Option<SingularitySummary>,
    pub properties: Option<PropertySummary>,
}

impl ExperimentReport {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            tool_version: crate::TOOL_VERSION.to_string(),
            partial: false,
            notes: Vec::new(),
            runs: Vec::new(),
            convergence: None,
            comparison: None,
            singularity: None,
            properties: None,
        }
    }
}
