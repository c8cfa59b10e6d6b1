//! Run loop, trajectories and termination reasons.

use serde::{Deserialize, Serialize};

use super::Scheme;
use crate::error::StepSignal;
use crate::geometry::{cross_ratio_values, j1_invariant, lattice_invariant, Point2};
use crate::ode::SchwarzRhs;

/// Relative x-step below which the lattice is considered to have collapsed.
pub const STEP_COLLAPSE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopCriteria {
    pub x_max: f64,
    /// Lower bound applied only after a fold, when the trajectory runs back.
    pub x_min: Option<f64>,
    pub max_steps: usize,
    pub continue_through_fold: bool,
}

impl StopCriteria {
    pub fn until(x_max: f64, max_steps: usize) -> Self {
        Self {
            x_max,
            x_min: None,
            max_steps,
            continue_through_fold: false,
        }
    }

    pub fn through_fold(x_max: f64, x_min: f64, max_steps: usize) -> Self {
        Self {
            x_max,
            x_min: Some(x_min),
            max_steps,
            continue_through_fold: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Termination {
    XMax,
    /// Ran back below `x_min` after a fold.
    XMin,
    StepLimit,
    /// The update formula hit its pole.
    Singularity { x: f64 },
    StepFailure { x: f64, detail: String },
    Domain { x: f64, detail: String },
    /// The x-direction reversed (fold) and continuation was not requested.
    Fold { x: f64 },
    /// The x-step fell below `STEP_COLLAPSE_TOL · x`.
    StepCollapse { x: f64 },
    /// A second reversal after a fold: numerical breakdown, not branch switching.
    NonMonotone { x: f64 },
    /// Adaptive step control demanded a step below its minimum.
    SingularitySuspected { x: f64 },
}

impl Termination {
    pub fn is_failure(&self) -> bool {
        matches!(
            self,
            Termination::StepFailure { .. } | Termination::Domain { .. } | Termination::NonMonotone { .. }
        )
    }
}

impl From<StepSignal> for Termination {
    fn from(s: StepSignal) -> Self {
        match s {
            StepSignal::Singularity { x } => Termination::Singularity { x },
            StepSignal::StepFailure { x, reason } => Termination::StepFailure { x, detail: reason },
            StepSignal::Domain { x, reason } => Termination::Domain { x, detail: reason },
        }
    }
}

/// Lattice quantities recorded per sample.
#[derive(Debug, Clone, PartialEq)]
pub enum Monitor {
    /// `I1` of the last pair and `I2` of the last triple; both conserved by
    /// the invariant second-order scheme.
    SecondOrder,
    /// `I1` of the last pair and `J1` of the last triple; the ratio of
    /// successive `I1` is conserved on invariant lattices.
    ThirdOrder,
    /// Cross-ratio of the last four values, with residual against
    /// `4[1 − (h²/2)F(midpoint)]`.
    CrossRatio(SchwarzRhs),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub n: usize,
    pub x: f64,
    pub y: f64,
    #[serde(rename = "I1")]
    pub i1: Option<f64>,
    #[serde(rename = "I2_or_J")]
    pub i2_or_j: Option<f64>,
}

/// Maximum deviation of a tracked quantity from its first value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub quantity: String,
    pub reference: f64,
    pub max_abs: f64,
    /// `max_abs / |reference|`, absent when the reference is zero.
    pub max_rel: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldInfo {
    /// Index of the closest-approach sample.
    pub index: usize,
    /// Closest-approach x (largest x reached).
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub scheme: String,
    pub samples: Vec<Sample>,
    pub termination: Termination,
    pub fold: Option<FoldInfo>,
    pub drift: Vec<Drift>,
}

impl Trajectory {
    /// Builds a trajectory from raw points, filling the monitor columns and drift summary.
    pub fn from_points(
        scheme: &str,
        points: &[Point2],
        monitor: &Monitor,
        termination: Termination,
        fold: Option<FoldInfo>,
    ) -> Self {
        let mut samples: Vec<Sample> = points
            .iter()
            .enumerate()
            .map(|(n, p)| Sample {
                n,
                x: p.x,
                y: p.y,
                i1: None,
                i2_or_j: None,
            })
            .collect();
        let mut tracked: Vec<(&str, Vec<f64>)> = Vec::new();
        match monitor {
            Monitor::SecondOrder => {
                let mut i1s = Vec::new();
                let mut i2s = Vec::new();
                for n in 1..points.len() {
                    samples[n].i1 = finite(lattice_invariant(points[n - 1], points[n]).ok());
                    i1s.extend(samples[n].i1);
                    if n >= 2 {
                        samples[n].i2_or_j = finite(lattice_invariant(points[n - 2], points[n]).ok());
                        i2s.extend(samples[n].i2_or_j);
                    }
                }
                tracked.push(("I1", i1s));
                tracked.push(("I2", i2s));
            }
            Monitor::ThirdOrder => {
                let mut ratios = Vec::new();
                for n in 1..points.len() {
                    samples[n].i1 = finite(lattice_invariant(points[n - 1], points[n]).ok());
                    if n >= 2 {
                        let ia = samples[n - 1].i1;
                        let ib = samples[n].i1;
                        let i2 = lattice_invariant(points[n - 2], points[n]).ok();
                        if let (Some(ia), Some(ib), Some(i2)) = (ia, ib, i2) {
                            samples[n].i2_or_j = finite(j1_invariant(ia, ib, i2).ok());
                            if ia != 0.0 && (ib / ia).is_finite() {
                                ratios.push(ib / ia);
                            }
                        }
                    }
                }
                tracked.push(("I1_ratio", ratios));
            }
            Monitor::CrossRatio(rhs) => {
                let mut residuals = Vec::new();
                for n in 3..points.len() {
                    let ys = [points[n - 3].y, points[n - 2].y, points[n - 1].y, points[n].y];
                    if let Some(r) = finite(cross_ratio_values(ys).ok()) {
                        samples[n].i2_or_j = Some(r);
                        let h = points[n - 1].x - points[n - 2].x;
                        let mid = 0.5 * (points[n - 2].x + points[n - 1].x);
                        let k = 4.0 * (1.0 - 0.5 * h * h * rhs.eval(mid));
                        residuals.push(r - k);
                    }
                }
                // residual is compared against zero
                residuals.insert(0, 0.0);
                tracked.push(("cross_ratio_residual", residuals));
            }
        }
        let drift = tracked
            .into_iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(name, v)| {
                let reference = v[0];
                let max_abs = v.iter().map(|q| (q - reference).abs()).fold(0.0, f64::max);
                Drift {
                    quantity: name.to_string(),
                    reference,
                    max_abs,
                    max_rel: (reference != 0.0).then(|| max_abs / reference.abs()),
                }
            })
            .collect();
        Self {
            scheme: scheme.to_string(),
            samples,
            termination,
            fold,
            drift,
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.x).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.y).collect()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    /// Samples up to and including the closest approach (the whole trajectory
    /// when there is no fold).
    pub fn forward_part(&self) -> &[Sample] {
        match self.fold {
            Some(f) => &self.samples[..=f.index],
            None => &self.samples,
        }
    }

    /// Samples after the closest approach.
    pub fn post_fold(&self) -> &[Sample] {
        match self.fold {
            Some(f) => &self.samples[f.index + 1..],
            None => &[],
        }
    }

    /// Largest x reached on the forward part.
    pub fn max_x(&self) -> f64 {
        self.forward_part().iter().map(|s| s.x).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Number of steps taken on the forward part (excluding seeds beyond the first).
    pub fn forward_steps(&self) -> usize {
        self.forward_part().len().saturating_sub(1)
    }

    /// Estimated singularity location: the fold's closest approach, or the last
    /// x when the run ended at a pole or collapsed.
    pub fn singularity_estimate(&self) -> Option<f64> {
        if let Some(f) = self.fold {
            return Some(f.x);
        }
        match self.termination {
            Termination::Singularity { .. }
            | Termination::StepCollapse { .. }
            | Termination::SingularitySuspected { .. } => self.last().map(|s| s.x),
            _ => None,
        }
    }

    pub fn drift_of(&self, quantity: &str) -> Option<&Drift> {
        self.drift.iter().find(|d| d.quantity == quantity)
    }
}

fn finite(v: Option<f64>) -> Option<f64> {
    v.filter(|q| q.is_finite())
}

/// Iterates `scheme` until a stop criterion or a step signal.
///
/// The first reversal of the x-direction is treated as a fold: its closest
/// approach is recorded and, when requested, the run continues with the same
/// update formulas (which switch branch by themselves). A later reversal ends
/// the run as [`Termination::NonMonotone`].
pub fn run<S: Scheme>(init: S, stop: &StopCriteria) -> Trajectory {
    let monitor = init.monitor();
    let id = init.id();
    let mut points = init.window();
    let mut state = init;
    let mut fold: Option<FoldInfo> = None;
    let mut termination = Termination::StepLimit;

    if state.latest().x >= stop.x_max {
        return Trajectory::from_points(id, &points, &monitor, Termination::XMax, None);
    }
    for _ in 0..stop.max_steps {
        let next = match state.step() {
            Ok(s) => s,
            Err(sig) => {
                termination = sig.into();
                break;
            }
        };
        let p = next.latest();
        let prev = *points.last().expect("schemes hold at least one point");
        if !p.x.is_finite() || !p.y.is_finite() {
            termination = Termination::Domain {
                x: prev.x,
                detail: "non-finite update".into(),
            };
            break;
        }
        let dx = p.x - prev.x;
        if fold.is_none() {
            if dx.abs() < STEP_COLLAPSE_TOL * prev.x.abs() {
                termination = Termination::StepCollapse { x: prev.x };
                break;
            }
            if dx < 0.0 {
                fold = Some(FoldInfo {
                    index: points.len() - 1,
                    x: prev.x,
                });
                if !stop.continue_through_fold {
                    termination = Termination::Fold { x: prev.x };
                    break;
                }
            }
        } else if dx >= 0.0 {
            termination = Termination::NonMonotone { x: prev.x };
            break;
        }
        points.push(p);
        state = next;
        if fold.is_none() && p.x >= stop.x_max {
            termination = Termination::XMax;
            break;
        }
        if fold.is_some() && stop.x_min.is_some_and(|m| p.x <= m) {
            termination = Termination::XMin;
            break;
        }
    }
    Trajectory::from_points(id, &points, &monitor, termination, fold)
}
