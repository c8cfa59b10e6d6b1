//! Runge–Kutta reference solver: classical fixed-step RK4 or the adaptive
//! Dormand–Prince 5(4) pair with a standard step-size controller.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::invariant_schemes::{Monitor, Termination, Trajectory};
use crate::ode::Ode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RkMethod {
    FixedRk4,
    AdaptiveEmbedded45,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RkConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub h_init: f64,
    /// Minimum step, relative to `max(1, |x|)`.
    pub h_min: f64,
    pub method: RkMethod,
    pub max_steps: usize,
}

impl Default for RkConfig {
    fn default() -> Self {
        Self::with_tol(1e-9)
    }
}

impl RkConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rel_tol: tol,
            abs_tol: tol,
            h_init: 1e-3,
            h_min: 1e-12,
            method: RkMethod::AdaptiveEmbedded45,
            max_steps: 2_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.h_min > 0.0 && self.h_init > 0.0) {
            return Err(Error::Config("RK tolerances and step bounds must be positive".into()));
        }
        Ok(())
    }
}

/// Accepted steps of a reference solve, with dense output.
#[derive(Debug, Clone, PartialEq)]
pub struct RkSolution {
    pub ode: Ode,
    pub xs: Vec<f64>,
    /// `[y, y', ...]` at each accepted x.
    pub states: Vec<Vec<f64>>,
    /// Derivative of the state at each accepted x.
    pub derivs: Vec<Vec<f64>>,
    pub termination: Termination,
}

fn rhs(ode: &Ode, x: f64, u: &[f64]) -> Option<Vec<f64>> {
    let m = u.len();
    let top = ode.highest_derivative(x, u).ok()?;
    let mut du = Vec::with_capacity(m);
    du.extend_from_slice(&u[1..]);
    du.push(top);
    du.iter().all(|v| v.is_finite()).then_some(du)
}

fn axpy(u: &[f64], h: f64, ks: &[(&[f64], f64)]) -> Vec<f64> {
    let mut out = u.to_vec();
    for (k, c) in ks {
        if *c != 0.0 {
            for (o, kv) in out.iter_mut().zip(k.iter()) {
                *o += h * c * kv;
            }
        }
    }
    out
}

// Dormand–Prince 5(4) tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// One Dormand–Prince step; returns the new state, its derivative and the
/// embedded error estimate.
fn dp_step(ode: &Ode, x: f64, u: &[f64], k1: &[f64], h: f64) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let k2 = rhs(ode, x + C2 * h, &axpy(u, h, &[(k1, A21)]))?;
    let k3 = rhs(ode, x + C3 * h, &axpy(u, h, &[(k1, A31), (&k2, A32)]))?;
    let k4 = rhs(ode, x + C4 * h, &axpy(u, h, &[(k1, A41), (&k2, A42), (&k3, A43)]))?;
    let k5 = rhs(ode, x + C5 * h, &axpy(u, h, &[(k1, A51), (&k2, A52), (&k3, A53), (&k4, A54)]))?;
    let k6 = rhs(
        ode,
        x + h,
        &axpy(u, h, &[(k1, A61), (&k2, A62), (&k3, A63), (&k4, A64), (&k5, A65)]),
    )?;
    let unew = axpy(u, h, &[(k1, B1), (&k3, B3), (&k4, B4), (&k5, B5), (&k6, B6)]);
    let k7 = rhs(ode, x + h, &unew)?;
    let err: Vec<f64> = (0..u.len())
        .map(|i| h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]))
        .collect();
    Some((unew, k7, err))
}

fn rk4_step(ode: &Ode, x: f64, u: &[f64], k1: &[f64], h: f64) -> Option<(Vec<f64>, Vec<f64>)> {
    let k2 = rhs(ode, x + 0.5 * h, &axpy(u, h, &[(k1, 0.5)]))?;
    let k3 = rhs(ode, x + 0.5 * h, &axpy(u, h, &[(&k2, 0.5)]))?;
    let k4 = rhs(ode, x + h, &axpy(u, h, &[(&k3, 1.0)]))?;
    let unew = axpy(u, h, &[(k1, 1.0 / 6.0), (&k2, 1.0 / 3.0), (&k3, 1.0 / 3.0), (&k4, 1.0 / 6.0)]);
    let du = rhs(ode, x + h, &unew)?;
    Some((unew, du))
}

/// Integrates `ode` from `x0` with initial state `init = [y, y', ...]` towards `x_end`.
///
/// When error control demands a step below `h_min`, the run ends with
/// [`Termination::SingularitySuspected`] at the last accepted x.
pub fn rk_reference(ode: &Ode, x0: f64, init: &[f64], x_end: f64, cfg: &RkConfig) -> Result<RkSolution> {
    cfg.validate()?;
    if init.len() != ode.order() {
        return Err(Error::Config(format!(
            "{} needs {} initial values, got {}",
            ode.name(),
            ode.order(),
            init.len()
        )));
    }
    if !(x_end > x0) {
        return Err(Error::Config("x_end must exceed x0".into()));
    }
    let k0 = rhs(ode, x0, init)
        .ok_or_else(|| Error::Config(format!("right-hand side undefined at the initial point x0 = {x0}")))?;
    let mut xs = vec![x0];
    let mut states = vec![init.to_vec()];
    let mut derivs = vec![k0];
    let mut x = x0;
    let mut h = cfg.h_init.min(x_end - x0);
    let mut termination = Termination::StepLimit;
    let mut steps = 0usize;
    while steps < cfg.max_steps {
        let u = states.last().unwrap().clone();
        let k1 = derivs.last().unwrap().clone();
        let last = x + h >= x_end;
        if last {
            h = x_end - x;
        }
        let min_h = cfg.h_min * x.abs().max(1.0);
        match cfg.method {
            RkMethod::FixedRk4 => match rk4_step(ode, x, &u, &k1, h) {
                Some((unew, du)) => {
                    x = if last { x_end } else { x + h };
                    xs.push(x);
                    states.push(unew);
                    derivs.push(du);
                    steps += 1;
                }
                None => {
                    termination = Termination::Domain {
                        x,
                        detail: "right-hand side undefined inside the step".into(),
                    };
                    break;
                }
            },
            RkMethod::AdaptiveEmbedded45 => {
                let trial = dp_step(ode, x, &u, &k1, h);
                let err_norm = trial.as_ref().map(|(unew, _, err)| {
                    let s: f64 = err
                        .iter()
                        .zip(unew.iter().zip(u.iter()))
                        .map(|(e, (a, b))| {
                            let sc = cfg.abs_tol + cfg.rel_tol * a.abs().max(b.abs());
                            (e / sc) * (e / sc)
                        })
                        .sum();
                    (s / u.len() as f64).sqrt()
                });
                match (trial, err_norm) {
                    (Some((unew, du, _)), Some(en)) if en <= 1.0 && en.is_finite() => {
                        x = if last { x_end } else { x + h };
                        xs.push(x);
                        states.push(unew);
                        derivs.push(du);
                        steps += 1;
                        let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
                        h *= fac;
                    }
                    (_, en) => {
                        let fac = match en {
                            Some(e) if e.is_finite() => (0.9 * e.powf(-0.2)).clamp(0.1, 0.9),
                            _ => 0.25,
                        };
                        h *= fac;
                        if h < min_h {
                            termination = Termination::SingularitySuspected { x };
                            break;
                        }
                        continue;
                    }
                }
            }
        }
        if x >= x_end {
            termination = Termination::XMax;
            break;
        }
    }
    Ok(RkSolution {
        ode: ode.clone(),
        xs,
        states,
        derivs,
        termination,
    })
}

/// Quintic Hermite interpolation on `[x0, x1]` from values, first and second
/// derivatives at both ends.
#[allow(clippy::too_many_arguments)]
pub fn hermite5(x0: f64, x1: f64, y0: f64, d0: f64, s0: f64, y1: f64, d1: f64, s1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    let h3 = 0.5 * (t3 - 2.0 * t4 + t5);
    let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    h0 * y0 + h1 * h * d0 + h2 * h * h * s0 + h3 * h * h * s1 + h4 * h * d1 + h5 * y1
}

impl RkSolution {
    pub fn x_start(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_end(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    /// Dense output for `y` on the integrated range.
    pub fn eval(&self, x: f64) -> Option<f64> {
        let n = self.xs.len();
        if n == 0 || x < self.xs[0] || x > self.xs[n - 1] {
            return None;
        }
        if n == 1 {
            return Some(self.states[0][0]);
        }
        let i = self.xs.partition_point(|&v| v <= x).clamp(1, n - 1) - 1;
        let (a, b) = (&self.states[i], &self.states[i + 1]);
        let (da, db) = (&self.derivs[i], &self.derivs[i + 1]);
        Some(hermite5(self.xs[i], self.xs[i + 1], a[0], a[1], da[1], b[0], b[1], db[1], x))
    }

    pub fn points(&self) -> Vec<Point2> {
        self.xs.iter().zip(&self.states).map(|(&x, u)| Point2::new(x, u[0])).collect()
    }

    pub fn trajectory(&self) -> Trajectory {
        let monitor = match &self.ode {
            Ode::SecondOrder { .. } => Monitor::SecondOrder,
            Ode::ThirdOrder { .. } => Monitor::ThirdOrder,
            Ode::Schwarzian { rhs } => Monitor::CrossRatio(rhs.clone()),
        };
        Trajectory::from_points("rk_reference", &self.points(), &monitor, self.termination.clone(), None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::InvariantRhs;

    #[test]
    fn hermite5_exact_on_quintics() {
        let f = |x: f64| 1.0 + x - 2.0 * x.powi(3) + 0.5 * x.powi(5);
        let d = |x: f64| 1.0 - 6.0 * x * x + 2.5 * x.powi(4);
        let s = |x: f64| -12.0 * x + 10.0 * x.powi(3);
        let (a, b) = (0.3, 1.1);
        for &x in &[0.3, 0.5, 0.77, 1.1] {
            let v = hermite5(a, b, f(a), d(a), s(a), f(b), d(b), s(b), x);
            assert!((v - f(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn matches_closed_form_second_order() {
        // y = 2√(1 − x) solves 2x y'' + y' = y'^3
        let exact = |x: f64| 2.0 * (1.0f64 - x).sqrt();
        let ode = Ode::SecondOrder { gamma: 1.0 };
        let x0 = 0.05;
        let sol = rk_reference(&ode, x0, &[exact(x0), -1.0 / (1.0f64 - x0).sqrt()], 0.9, &RkConfig::default()).unwrap();
        assert_eq!(sol.termination, Termination::XMax);
        let mut worst = 0.0f64;
        for i in 0..=100 {
            let x = x0 + (0.9 - x0) * i as f64 / 100.0;
            worst = worst.max((sol.eval(x).unwrap() - exact(x)).abs());
        }
        // global error accumulates to a small multiple of the local tolerance
        assert!(worst < 5e-8, "{worst}");
    }

    #[test]
    fn tighter_tolerance_does_not_increase_error() {
        let exact = |x: f64| 2.0 * (1.0f64 - x).sqrt();
        let ode = Ode::SecondOrder { gamma: 1.0 };
        let init = [exact(0.1), -1.0 / 0.9f64.sqrt()];
        let mut prev = f64::INFINITY;
        for tol in [1e-6, 5e-7, 2.5e-7, 1.25e-7] {
            let sol = rk_reference(&ode, 0.1, &init, 0.9, &RkConfig::with_tol(tol)).unwrap();
            let e = sol
                .points()
                .iter()
                .map(|p| (p.y - exact(p.x)).abs())
                .fold(0.0, f64::max);
            assert!(e <= prev * 1.05, "tol {tol}: {e} > {prev}");
            prev = e;
        }
    }

    #[test]
    fn stops_near_fold() {
        let ode = Ode::SecondOrder { gamma: 1.0 };
        let sol = rk_reference(&ode, 0.5, &[-2.0 * 0.5f64.sqrt(), 1.0 / 0.5f64.sqrt()], 2.0, &RkConfig::default())
            .unwrap();
        assert!(matches!(sol.termination, Termination::SingularitySuspected { .. }));
        assert!((sol.x_end() - 1.0).abs() < 1e-6, "{}", sol.x_end());
    }

    #[test]
    fn fixed_rk4_runs_to_end() {
        let ode = Ode::ThirdOrder { rhs: InvariantRhs::PowerLaw { alpha: -1.0 } };
        let cfg = RkConfig {
            method: RkMethod::FixedRk4,
            h_init: 0.01,
            ..RkConfig::default()
        };
        let sol = rk_reference(&ode, 1.0, &[1.0, 10.0, -4.0], 2.0, &cfg).unwrap();
        assert_eq!(sol.termination, Termination::XMax);
        assert_eq!(sol.xs.len(), 101);
    }

    #[test]
    fn wrong_state_length_is_config_error() {
        let ode = Ode::SecondOrder { gamma: 1.0 };
        assert!(rk_reference(&ode, 1.0, &[1.0], 2.0, &RkConfig::default()).is_err());
    }
}
