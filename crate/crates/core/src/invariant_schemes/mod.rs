//! Symmetry-preserving steppers and the generic run loop.
//!
//! Every stepper is a plain value; [`Scheme::step`] maps a state to the next
//! state or to a [`StepSignal`](crate::StepSignal). The run loop in [`run`]
//! drives any [`Scheme`], including the standard baselines.

pub mod run;
pub mod schwarz;
pub mod second_order;
pub mod third_order;

pub use run::{run, Drift, FoldInfo, Monitor, Sample, StopCriteria, Termination, Trajectory};
pub use schwarz::SchwarzState;
pub use second_order::SecondOrderState;
pub use third_order::{ThirdOrderMode, ThirdOrderState};

use crate::error::StepSignal;
use crate::geometry::Point2;

pub trait Scheme: Clone {
    /// Short identifier recorded in trajectories.
    fn id(&self) -> &'static str;

    /// Points held by the state (the seeds, for a freshly built state).
    fn window(&self) -> Vec<Point2>;

    /// The newest point.
    fn latest(&self) -> Point2;

    fn step(&self) -> Result<Self, StepSignal>;

    /// Which lattice quantities the run loop tracks along the trajectory.
    fn monitor(&self) -> Monitor;
}

/// Maps a geometry error raised while stepping to a domain signal at `x`.
pub(crate) fn domain_signal(x: f64, err: crate::Error) -> StepSignal {
    StepSignal::Domain {
        x,
        reason: err.to_string(),
    }
}
