//! Experiment driver: problem specifications, reference selection,
//! convergence, comparison and singularity experiments, the randomized
//! property suite, and CSV/JSON output.

pub mod config;
pub mod emit;
pub mod experiments;
pub mod oracle;
pub mod problem;
pub mod properties;
pub mod report;

pub use config::Settings;
pub use emit::{emit, Format};
pub use experiments::{matched_spec, matched_step, run_comparison, run_convergence, run_singularity, solve};
pub use oracle::{Oracle, OracleId};
pub use problem::{InitialData, ProblemSpec, SchemeKind};
pub use properties::run_property_suite;
pub use report::{ExperimentKind, ExperimentReport, RunRecord};
