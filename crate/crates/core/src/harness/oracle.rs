//! Reference solutions selected per problem, and errors against them.

use serde::{Deserialize, Serialize};

use super::problem::ProblemSpec;
use crate::error::{Error, Result};
use crate::invariant_schemes::{Termination, Trajectory};
use crate::ode::{Ode, SchwarzRhs};
use crate::oracles::{SchwarzExact, SecondOrderExact};
use crate::standard_schemes::{rk_reference, RkConfig, RkSolution};

/// Which reference produced an error column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleId {
    /// Closed form of the second-order equation through the initial data.
    ClosedFormSecondOrder { gamma: f64, c: f64, y_b: f64 },
    /// Adaptive Dormand–Prince solve at the given tolerance.
    RkReference { tol: f64 },
    /// `y = u1/u2` for the Schwarzian equation with constant `F`.
    SchwarzExact { f: f64 },
}

#[derive(Debug, Clone)]
pub enum Oracle {
    SecondOrder(SecondOrderExact),
    Rk { solution: RkSolution, tol: f64 },
    Schwarz(SchwarzExact),
}

impl Oracle {
    /// The reference for `spec`: closed forms where they exist, otherwise an
    /// adaptive solve over `[x0, x_max]` at `spec.rk_tol`.
    pub fn for_spec(spec: &ProblemSpec) -> Result<Self> {
        let u = spec.initial_state()?;
        let x0 = spec.ic.x0;
        let unavailable = |e: Error| Error::OracleUnavailable(e.to_string());
        match &spec.ode {
            Ode::SecondOrder { gamma } => Ok(Oracle::SecondOrder(
                SecondOrderExact::fit_from_ic(*gamma, x0, u[0], u[1]).map_err(unavailable)?,
            )),
            Ode::Schwarzian {
                rhs: SchwarzRhs::Constant { value },
            } => Ok(Oracle::Schwarz(
                SchwarzExact::fit(*value, x0, u[0], u[1], u[2]).map_err(unavailable)?,
            )),
            ode => {
                let cfg = RkConfig::with_tol(spec.rk_tol);
                let solution = rk_reference(ode, x0, &u, spec.x_max, &cfg).map_err(unavailable)?;
                if solution.xs.len() < 2 {
                    return Err(Error::OracleUnavailable(format!(
                        "reference solve stopped at the initial point ({:?})",
                        solution.termination
                    )));
                }
                Ok(Oracle::Rk {
                    solution,
                    tol: spec.rk_tol,
                })
            }
        }
    }

    pub fn id(&self) -> OracleId {
        match self {
            Oracle::SecondOrder(e) => OracleId::ClosedFormSecondOrder {
                gamma: e.gamma,
                c: e.c,
                y_b: e.y_b,
            },
            Oracle::Rk { tol, .. } => OracleId::RkReference { tol: *tol },
            Oracle::Schwarz(e) => OracleId::SchwarzExact { f: e.f },
        }
    }

    /// Reference value at `x`; `post_fold` selects the second branch where the
    /// reference has one. `None` outside the reference's range.
    pub fn eval(&self, x: f64, post_fold: bool) -> Option<f64> {
        match self {
            Oracle::SecondOrder(e) => {
                let e = if post_fold { e.with_branch(e.branch.other()) } else { *e };
                e.eval(x).ok()
            }
            Oracle::Rk { solution, .. } => (!post_fold).then(|| solution.eval(x)).flatten(),
            Oracle::Schwarz(e) => (!post_fold).then(|| e.eval(x).ok()).flatten(),
        }
    }

    /// Largest x where the reference is defined on the first branch.
    pub fn x_limit(&self) -> Option<f64> {
        match self {
            Oracle::SecondOrder(e) => e.singularity_x().filter(|&x| x > 0.0),
            Oracle::Rk { solution, .. } => match solution.termination {
                Termination::XMax => None,
                _ => Some(solution.x_end()),
            },
            Oracle::Schwarz(_) => None,
        }
    }

    /// Absolute error of every sample, `None` where the reference is undefined.
    pub fn errors(&self, traj: &Trajectory) -> Vec<Option<f64>> {
        let fold_index = traj.fold.map(|f| f.index);
        traj.samples
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let post = fold_index.is_some_and(|k| i > k);
                self.eval(s.x, post).map(|y| (s.y - y).abs()).filter(|e| e.is_finite())
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::problem::{InitialData, SchemeKind};
    use crate::ode::InvariantRhs;

    #[test]
    fn closed_form_for_second_order() {
        let spec = ProblemSpec::new(
            Ode::SecondOrder { gamma: 1.0 },
            InitialData::new(0.1, 2.0 * 0.9f64.sqrt(), -1.0 / 0.9f64.sqrt(), None),
            SchemeKind::InvariantStrict,
            0.01,
            0.5,
        );
        let o = Oracle::for_spec(&spec).unwrap();
        match o.id() {
            OracleId::ClosedFormSecondOrder { c, y_b, .. } => {
                assert!((c - 1.0).abs() < 1e-12 && y_b.abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        assert!((o.x_limit().unwrap() - 1.0).abs() < 1e-12);
        let y = o.eval(0.75, false).unwrap();
        assert!((y - 1.0).abs() < 1e-12);
        assert!((o.eval(0.75, true).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn third_order_falls_back_to_rk() {
        let spec = ProblemSpec::new(
            Ode::ThirdOrder {
                rhs: InvariantRhs::PowerLaw { alpha: -1.0 },
            },
            InitialData::new(1.0, 1.0, 1.0, Some(3.0)),
            SchemeKind::InvariantGamma,
            0.01,
            2.0,
        );
        let o = Oracle::for_spec(&spec).unwrap();
        assert_eq!(o.id(), OracleId::RkReference { tol: 1e-9 });
        let lim = o.x_limit().unwrap();
        assert!(lim > 1.5 && lim < 1.6, "{lim}");
        assert!(o.eval(1.7, false).is_none());
    }
}
