//! Symmetry-preserving difference schemes for three SL(2,R)-invariant ODEs,
//! with standard discretizations, reference solutions and an experiment harness.
//!
//! Module map:
//! * [`geometry`]: group actions, continuous and difference invariants;
//! * [`invariant_schemes`]: the invariant steppers and the run loop;
//! * [`standard_schemes`]: finite-difference and Runge–Kutta baselines;
//! * [`oracles`]: closed-form and semi-analytic reference solutions;
//! * [`harness`]: experiments, reports and CSV/JSON output.

// `!(a > b)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod harness;
pub mod invariant_schemes;
pub mod numerics;
pub mod ode;
pub mod oracles;
pub mod precision;
pub mod standard_schemes;

pub use error::{Error, Result, StepSignal};
pub use geometry::{GroupElement1D, GroupElement2D, JetPoint, Point2, Stencil4};
pub use ode::{InvariantRhs, Ode, SchwarzRhs};

/// Version string embedded in JSON reports.
pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
