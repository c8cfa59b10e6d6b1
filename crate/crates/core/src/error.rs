use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by geometry evaluation, scheme construction, oracles and the harness.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined
    /// (pole of a group action, zero derivative, x <= 0 for the 2D realization).
    #[error("domain error: {0}")]
    Domain(String),

    /// A stencil whose invariants have a vanishing denominator.
    #[error("degenerate stencil: {0}")]
    DegenerateStencil(String),

    /// Invalid problem or scheme configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// No reference solution can be produced for the requested configuration.
    #[error("oracle unavailable: {0}")]
    OracleUnavailable(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Why a single step of a stepper did not produce a new point.
///
/// These are signals rather than failures: the run loop turns them into a
/// termination reason and the harness reports them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Error)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSignal {
    /// The explicit update has a vanishing (or sign-flipped) denominator: the
    /// next lattice point would lie at infinity.
    #[error("singularity reached near x = {x}")]
    Singularity { x: f64 },

    /// An implicit solve did not converge, or the tracked root disappeared.
    #[error("step failure at x = {x}: {reason}")]
    StepFailure { x: f64, reason: String },

    /// A quantity left the real domain (e.g. negative argument of a fractional power).
    #[error("domain violation at x = {x}: {reason}")]
    Domain { x: f64, reason: String },
}
