//! Problem specifications and their integration.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariant_schemes::{
    run, SchwarzState, SecondOrderState, StopCriteria, ThirdOrderMode, ThirdOrderState, Trajectory,
};
use crate::ode::{InvariantRhs, Ode, SchwarzRhs};
use crate::oracles::{SchwarzExact, SecondOrderExact};
use crate::standard_schemes::{rk_reference, EulerSecondOrderState, FdSecondOrderState, FdThirdOrderState, RkConfig};

pub const DEFAULT_MAX_STEPS: usize = 200_000;
pub const DEFAULT_RK_TOL: f64 = 1e-9;

/// Tolerance of the reference solve that seeds Schwarzian runs with non-constant `F`.
const SEED_RK_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    InvariantStrict,
    InvariantGamma,
    InvariantImplicit,
    StandardFd,
    /// Forward differences; second-order equation only.
    StandardEuler,
    RkReference,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 6] = [
        SchemeKind::InvariantStrict,
        SchemeKind::InvariantGamma,
        SchemeKind::InvariantImplicit,
        SchemeKind::StandardFd,
        SchemeKind::StandardEuler,
        SchemeKind::RkReference,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::InvariantStrict => "invariant_strict",
            SchemeKind::InvariantGamma => "invariant_gamma",
            SchemeKind::InvariantImplicit => "invariant_implicit",
            SchemeKind::StandardFd => "standard_fd",
            SchemeKind::StandardEuler => "standard_euler",
            SchemeKind::RkReference => "rk_reference",
        }
    }

    pub fn is_invariant(self) -> bool {
        matches!(
            self,
            SchemeKind::InvariantStrict | SchemeKind::InvariantGamma | SchemeKind::InvariantImplicit
        )
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown scheme '{s}'")))
    }
}

/// `x0, y0` and as many derivatives as the equation needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub x0: f64,
    pub y0: f64,
    pub yp0: Option<f64>,
    pub ypp0: Option<f64>,
}

impl InitialData {
    pub fn new(x0: f64, y0: f64, yp0: f64, ypp0: Option<f64>) -> Self {
        Self {
            x0,
            y0,
            yp0: Some(yp0),
            ypp0,
        }
    }

    fn values(&self, order: usize) -> Result<Vec<f64>> {
        let all = [Some(self.x0), Some(self.y0), self.yp0, self.ypp0];
        all[1..=order]
            .iter()
            .map(|v| v.ok_or_else(|| Error::Config(format!("initial data need {} values after x0", order))))
            .collect()
    }
}

impl FromStr for InitialData {
    type Err = Error;

    /// Parses `x0,y0[,yp0[,ypp0]]`.
    fn from_str(s: &str) -> Result<Self> {
        let vals = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad number '{t}' in initial data")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if !(2..=4).contains(&vals.len()) {
            return Err(Error::Config(format!(
                "initial data must be x0,y0[,yp0[,ypp0]], got {} values",
                vals.len()
            )));
        }
        Ok(Self {
            x0: vals[0],
            y0: vals[1],
            yp0: vals.get(2).copied(),
            ypp0: vals.get(3).copied(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub ode: Ode,
    pub ic: InitialData,
    pub scheme: SchemeKind,
    /// Seed spacing for the invariant schemes, grid step for the standard ones,
    /// initial step for the adaptive reference.
    pub h: f64,
    pub x_max: f64,
    pub max_steps: usize,
    pub continue_through_fold: bool,
    /// Stop on the way back after a fold; only used with `continue_through_fold`.
    pub x_min: Option<f64>,
    /// Tolerance of the Runge–Kutta reference (as scheme or as oracle).
    pub rk_tol: f64,
}

impl ProblemSpec {
    pub fn new(ode: Ode, ic: InitialData, scheme: SchemeKind, h: f64, x_max: f64) -> Self {
        Self {
            ode,
            ic,
            scheme,
            h,
            x_max,
            max_steps: DEFAULT_MAX_STEPS,
            continue_through_fold: false,
            x_min: None,
            rk_tol: DEFAULT_RK_TOL,
        }
    }

    pub fn with_scheme(&self, scheme: SchemeKind) -> Self {
        Self { scheme, ..self.clone() }
    }

    pub fn with_h(&self, h: f64) -> Self {
        Self { h, ..self.clone() }
    }

    pub fn through_fold(mut self, x_min: f64) -> Self {
        self.continue_through_fold = true;
        self.x_min = Some(x_min);
        self
    }

    /// `[y0, y'0, ...]` up to the order of the equation.
    pub fn initial_state(&self) -> Result<Vec<f64>> {
        self.ic.values(self.ode.order())
    }

    pub fn validate(&self) -> Result<()> {
        match &self.ode {
            Ode::SecondOrder { gamma } if !(*gamma > 0.0 && gamma.is_finite()) => {
                return Err(Error::Config(format!("γ = {gamma} must be positive")));
            }
            Ode::ThirdOrder {
                rhs: InvariantRhs::PowerLaw { alpha },
            } if !alpha.is_finite() => {
                return Err(Error::Config(format!("α = {alpha} must be finite")));
            }
            _ => {}
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::Config(format!("step h = {} must be positive", self.h)));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("step limit must be positive".into()));
        }
        if !(self.ic.x0.is_finite() && self.ic.y0.is_finite()) {
            return Err(Error::Config("x0 and y0 must be finite".into()));
        }
        if !(self.x_max > self.ic.x0) {
            return Err(Error::Config(format!("x_max = {} must exceed x0 = {}", self.x_max, self.ic.x0)));
        }
        if !(self.rk_tol > 0.0) {
            return Err(Error::Config("RK tolerance must be positive".into()));
        }
        self.initial_state()?;
        let supported = match (&self.ode, self.scheme) {
            (_, SchemeKind::RkReference) => true,
            (Ode::SecondOrder { .. }, k) => {
                matches!(k, SchemeKind::InvariantStrict | SchemeKind::StandardFd | SchemeKind::StandardEuler)
            }
            (Ode::ThirdOrder { .. }, k) => k != SchemeKind::StandardEuler,
            (Ode::Schwarzian { .. }, k) => k == SchemeKind::InvariantStrict,
        };
        if !supported {
            return Err(Error::Config(format!(
                "scheme {} is not available for the {} equation",
                self.scheme,
                self.ode.name()
            )));
        }
        Ok(())
    }

    pub fn stop_criteria(&self) -> StopCriteria {
        StopCriteria {
            x_max: self.x_max,
            x_min: self.x_min,
            max_steps: self.max_steps,
            continue_through_fold: self.continue_through_fold,
        }
    }

    /// Builds the stepper (or reference solve) and runs it.
    pub fn integrate(&self) -> Result<Trajectory> {
        self.validate()?;
        let stop = self.stop_criteria();
        let u = self.initial_state()?;
        let (x0, h) = (self.ic.x0, self.h);
        match (&self.ode, self.scheme) {
            (ode, SchemeKind::RkReference) => {
                let cfg = RkConfig {
                    h_init: h,
                    max_steps: self.max_steps,
                    ..RkConfig::with_tol(self.rk_tol)
                };
                Ok(rk_reference(ode, x0, &u, self.x_max, &cfg)?.trajectory())
            }
            (Ode::SecondOrder { gamma }, kind) => {
                let g = *gamma;
                match kind {
                    SchemeKind::StandardEuler => Ok(run(EulerSecondOrderState::new(x0, h, u[0], u[1], g)?, &stop)),
                    SchemeKind::InvariantStrict => {
                        let y1 = second_order_seed(g, x0, &u, h)?;
                        Ok(run(SecondOrderState::from_xy(x0, u[0], x0 + h, y1, g)?, &stop))
                    }
                    _ => {
                        let y1 = second_order_seed(g, x0, &u, h)?;
                        Ok(run(FdSecondOrderState::new(x0, h, u[0], y1, g)?, &stop))
                    }
                }
            }
            (Ode::ThirdOrder { rhs }, kind) => {
                let mode = match kind {
                    SchemeKind::InvariantStrict => ThirdOrderMode::Strict,
                    SchemeKind::InvariantGamma => ThirdOrderMode::GammaLattice,
                    SchemeKind::InvariantImplicit => ThirdOrderMode::Implicit,
                    _ => return Ok(run(FdThirdOrderState::from_jet(x0, u[0], u[1], u[2], h, *rhs)?, &stop)),
                };
                Ok(run(ThirdOrderState::init(x0, u[0], u[1], u[2], h, *rhs, mode)?, &stop))
            }
            (Ode::Schwarzian { rhs }, _) => {
                let seeds = schwarz_seeds(rhs, x0, &u, h)?;
                Ok(run(SchwarzState::new(x0, h, seeds, rhs.clone())?, &stop))
            }
        }
    }
}

/// `y(x0 + h)` on the closed-form solution through the initial data.
fn second_order_seed(gamma: f64, x0: f64, u: &[f64], h: f64) -> Result<f64> {
    let exact = SecondOrderExact::fit_from_ic(gamma, x0, u[0], u[1])?;
    exact
        .eval(x0 + h)
        .map_err(|_| Error::Config(format!("seed x0 + h = {} lies beyond the fold; reduce h", x0 + h)))
}

/// Values at `x0, x0 + h, x0 + 2h`: exact for constant `F`, otherwise from a
/// tight reference solve.
fn schwarz_seeds(rhs: &SchwarzRhs, x0: f64, u: &[f64], h: f64) -> Result<[f64; 3]> {
    let xs = [x0, x0 + h, x0 + 2.0 * h];
    match rhs {
        SchwarzRhs::Constant { value } => {
            let e = SchwarzExact::fit(*value, x0, u[0], u[1], u[2])?;
            Ok([u[0], e.eval(xs[1])?, e.eval(xs[2])?])
        }
        SchwarzRhs::Polynomial { .. } => {
            let ode = Ode::Schwarzian { rhs: rhs.clone() };
            let cfg = RkConfig {
                h_init: h.min(1e-3),
                ..RkConfig::with_tol(SEED_RK_TOL)
            };
            let sol = rk_reference(&ode, x0, u, xs[2], &cfg)?;
            let at = |x: f64| {
                sol.eval(x)
                    .ok_or_else(|| Error::Config(format!("seed solve did not reach x = {x}")))
            };
            Ok([u[0], at(xs[1])?, at(xs[2])?])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_initial_data() {
        let ic: InitialData = "1, 1, 10, -4".parse().unwrap();
        assert_eq!((ic.yp0, ic.ypp0), (Some(10.0), Some(-4.0)));
        let ic: InitialData = "0.1,0".parse().unwrap();
        assert_eq!((ic.yp0, ic.ypp0), (None, None));
        assert!("1".parse::<InitialData>().is_err());
        assert!("1,2,x".parse::<InitialData>().is_err());
    }

    #[test]
    fn rejects_mismatched_scheme() {
        let ic: InitialData = "0.1,0,1".parse().unwrap();
        let s = ProblemSpec::new(Ode::SecondOrder { gamma: 1.0 }, ic, SchemeKind::InvariantGamma, 0.01, 0.5);
        assert!(matches!(s.validate(), Err(Error::Config(_))));
        let s = s.with_scheme(SchemeKind::InvariantStrict);
        s.validate().unwrap();
        assert!(matches!(s.with_h(0.0).validate(), Err(Error::Config(_))));
    }

    #[test]
    fn third_order_needs_second_derivative() {
        let ic: InitialData = "1,1,1".parse().unwrap();
        let ode = Ode::ThirdOrder {
            rhs: InvariantRhs::PowerLaw { alpha: -1.0 },
        };
        let s = ProblemSpec::new(ode, ic, SchemeKind::StandardFd, 0.01, 2.0);
        assert!(matches!(s.integrate(), Err(Error::Config(_))));
    }

    #[test]
    fn scheme_names_round_trip() {
        for k in SchemeKind::ALL {
            assert_eq!(k.name().parse::<SchemeKind>().unwrap(), k);
        }
    }
}
