//! Standard finite-difference schemes on a uniform lattice `x_n = x0 + n h`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, StepSignal};
use crate::geometry::Point2;
use crate::invariant_schemes::third_order::TaylorSeed;
use crate::invariant_schemes::{Monitor, Scheme};
use crate::ode::InvariantRhs;

pub const NEWTON_MAX_ITER: usize = 50;
pub const NEWTON_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub x0: f64,
    pub h: f64,
    pub n_max: usize,
}

impl UniformGrid {
    pub fn new(x0: f64, h: f64, n_max: usize) -> Result<Self> {
        if !(h > 0.0) || !x0.is_finite() {
            return Err(Error::Config(format!("uniform grid needs h > 0, got {h}")));
        }
        Ok(Self { x0, h, n_max })
    }

    pub fn x(&self, n: usize) -> f64 {
        self.x0 + n as f64 * self.h
    }
}

/// One step of the centered scheme
/// `2x_n (y_{n+1} − 2y_n + y_{n−1})/h² + D = γ D³`, `D = (y_{n+1} − y_{n−1})/(2h)`.
///
/// Written as a cubic in `D` and solved by Newton from the linear
/// extrapolation. Only the root on the branch connected to `γ = 0`
/// (`3γD² < 4x/h + 1`) is accepted; when Newton leaves it, the scheme has
/// lost its solution and a step failure is signalled.
pub fn fd_step_second_order(grid: &UniformGrid, y_prev: f64, y_cur: f64, n: usize, gamma: f64) -> Result<f64, StepSignal> {
    let h = grid.h;
    let x = grid.x(n);
    let p = 4.0 * x / h + 1.0;
    let q = 2.0 * x * (2.0 * y_prev - 2.0 * y_cur) / (h * h);
    let mut d = (y_cur - y_prev) / h;
    let mut converged = false;
    for _ in 0..NEWTON_MAX_ITER {
        let r = gamma * d * d * d - p * d - q;
        let dr = 3.0 * gamma * d * d - p;
        let delta = r / dr;
        if !delta.is_finite() {
            break;
        }
        d -= delta;
        if delta.abs() <= NEWTON_TOL * (1.0 + d.abs()) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(StepSignal::StepFailure {
            x,
            reason: "Newton did not converge".into(),
        });
    }
    if !(3.0 * gamma * d * d < p) {
        return Err(StepSignal::StepFailure {
            x,
            reason: "no real root on the tracked branch".into(),
        });
    }
    Ok(y_prev + 2.0 * h * d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdSecondOrderState {
    pub grid: UniformGrid,
    /// Index of `y_cur`.
    pub n: usize,
    pub y_prev: f64,
    pub y_cur: f64,
    pub gamma: f64,
}

impl FdSecondOrderState {
    pub fn new(x0: f64, h: f64, y0: f64, y1: f64, gamma: f64) -> Result<Self> {
        Ok(Self {
            grid: UniformGrid::new(x0, h, usize::MAX)?,
            n: 1,
            y_prev: y0,
            y_cur: y1,
            gamma,
        })
    }
}

impl Scheme for FdSecondOrderState {
    fn id(&self) -> &'static str {
        "standard_fd_second_order"
    }

    fn window(&self) -> Vec<Point2> {
        vec![
            Point2::new(self.grid.x(self.n - 1), self.y_prev),
            Point2::new(self.grid.x(self.n), self.y_cur),
        ]
    }

    fn latest(&self) -> Point2 {
        Point2::new(self.grid.x(self.n), self.y_cur)
    }

    fn step(&self) -> Result<Self, StepSignal> {
        let y = fd_step_second_order(&self.grid, self.y_prev, self.y_cur, self.n, self.gamma)?;
        Ok(Self {
            n: self.n + 1,
            y_prev: self.y_cur,
            y_cur: y,
            ..*self
        })
    }

    fn monitor(&self) -> Monitor {
        Monitor::SecondOrder
    }
}

/// Forward-difference (explicit Euler) scheme for `2x y'' + y' = γ y'^3` as the
/// system `y' = v`, `v' = (γ v³ − v)/(2x)`. First-order accurate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerSecondOrderState {
    pub grid: UniformGrid,
    pub n: usize,
    pub y: f64,
    pub v: f64,
    pub gamma: f64,
}

impl EulerSecondOrderState {
    pub fn new(x0: f64, h: f64, y0: f64, yp0: f64, gamma: f64) -> Result<Self> {
        if !(x0 > 0.0) {
            return Err(Error::Config("forward Euler needs x0 > 0 (equation singular at 0)".into()));
        }
        Ok(Self {
            grid: UniformGrid::new(x0, h, usize::MAX)?,
            n: 0,
            y: y0,
            v: yp0,
            gamma,
        })
    }
}

impl Scheme for EulerSecondOrderState {
    fn id(&self) -> &'static str {
        "standard_euler_second_order"
    }

    fn window(&self) -> Vec<Point2> {
        vec![self.latest()]
    }

    fn latest(&self) -> Point2 {
        Point2::new(self.grid.x(self.n), self.y)
    }

    fn step(&self) -> Result<Self, StepSignal> {
        let x = self.grid.x(self.n);
        let h = self.grid.h;
        let v = self.v + h * (self.gamma * self.v.powi(3) - self.v) / (2.0 * x);
        if !v.is_finite() {
            return Err(StepSignal::Domain {
                x,
                reason: "derivative overflow".into(),
            });
        }
        Ok(Self {
            n: self.n + 1,
            y: self.y + h * self.v,
            v,
            ..*self
        })
    }

    fn monitor(&self) -> Monitor {
        Monitor::SecondOrder
    }
}

/// Residual of the 4-point discretization of `x²(y'y''' − 3y''²) = y'^5 F(I1c)`
/// centered at `x_n + h/2`, and its derivative in `y_{n+2}`.
fn third_order_residual(xm: f64, h: f64, y: [f64; 4], rhs: &InvariantRhs) -> Option<(f64, f64)> {
    let [ym, y0, y1, y2] = y;
    let p = (y1 - y0) / h;
    let q = (y2 - y1 - y0 + ym) / (2.0 * h * h);
    let t = (y2 - 3.0 * y1 + 3.0 * y0 - ym) / (h * h * h);
    if p == 0.0 {
        return None;
    }
    let z = (2.0 * xm * q + p) / (p * p * p);
    let f = rhs.eval(z)?;
    let fp = rhs.derivative(z)?;
    let p5 = p.powi(5);
    let g = xm * xm * (p * t - 3.0 * q * q) - p5 * f;
    let dq = 1.0 / (2.0 * h * h);
    let dt = 1.0 / (h * h * h);
    let dz = 2.0 * xm * dq / (p * p * p);
    let dg = xm * xm * (p * dt - 6.0 * q * dq) - p5 * fp * dz;
    Some((g, dg))
}

/// One step of the standard third-order scheme: solves the centered residual
/// for `y_{n+2}` by Newton from the cubic extrapolation
/// `3y_{n+1} − 3y_n + y_{n−1}`. `n` is the index of `y_prev[1]`.
pub fn fd_step_third_order(grid: &UniformGrid, y_prev: [f64; 3], n: usize, rhs: &InvariantRhs) -> Result<f64, StepSignal> {
    let h = grid.h;
    let xm = grid.x(n) + 0.5 * h;
    let [ym, y0, y1] = y_prev;
    let mut y2 = 3.0 * y1 - 3.0 * y0 + ym;
    for _ in 0..NEWTON_MAX_ITER {
        let Some((g, dg)) = third_order_residual(xm, h, [ym, y0, y1, y2], rhs) else {
            return Err(StepSignal::StepFailure {
                x: grid.x(n + 1),
                reason: "residual left the domain of F".into(),
            });
        };
        let delta = g / dg;
        if !delta.is_finite() {
            break;
        }
        y2 -= delta;
        if delta.abs() <= NEWTON_TOL * (1.0 + y2.abs()) {
            return Ok(y2);
        }
    }
    Err(StepSignal::StepFailure {
        x: grid.x(n + 1),
        reason: "Newton did not converge".into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdThirdOrderState {
    pub grid: UniformGrid,
    /// Index of `y[2]`.
    pub n: usize,
    pub y: [f64; 3],
    pub rhs: InvariantRhs,
}

impl FdThirdOrderState {
    pub fn new(x0: f64, h: f64, y: [f64; 3], rhs: InvariantRhs) -> Result<Self> {
        Ok(Self {
            grid: UniformGrid::new(x0, h, usize::MAX)?,
            n: 2,
            y,
            rhs,
        })
    }

    /// Seeds at `x0, x0 + h, x0 + 2h` from the cubic Taylor polynomial.
    pub fn from_jet(x0: f64, y0: f64, yp0: f64, ypp0: f64, h: f64, rhs: InvariantRhs) -> Result<Self> {
        let t = TaylorSeed::new(x0, y0, yp0, ypp0, rhs)?;
        Self::new(x0, h, [t.eval(x0), t.eval(x0 + h), t.eval(x0 + 2.0 * h)], rhs)
    }
}

impl Scheme for FdThirdOrderState {
    fn id(&self) -> &'static str {
        "standard_fd_third_order"
    }

    fn window(&self) -> Vec<Point2> {
        (0..3).map(|i| Point2::new(self.grid.x(self.n + i - 2), self.y[i])).collect()
    }

    fn latest(&self) -> Point2 {
        Point2::new(self.grid.x(self.n), self.y[2])
    }

    fn step(&self) -> Result<Self, StepSignal> {
        let y = fd_step_third_order(&self.grid, self.y, self.n - 1, &self.rhs)?;
        Ok(Self {
            n: self.n + 1,
            y: [self.y[1], self.y[2], y],
            ..*self
        })
    }

    fn monitor(&self) -> Monitor {
        Monitor::ThirdOrder
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariant_schemes::{run, StopCriteria, Termination};

    #[test]
    fn linear_case_reproduces_sqrt_solution_to_second_order() {
        // γ = 0: 2x y'' + y' = 0 has y = √x
        let exact = |x: f64| x.sqrt();
        let mut errs = Vec::new();
        for h in [0.02, 0.01] {
            let s = FdSecondOrderState::new(1.0, h, exact(1.0), exact(1.0 + h), 0.0).unwrap();
            let t = run(s, &StopCriteria::until(2.0, 10_000));
            assert_eq!(t.termination, Termination::XMax);
            let e = t.samples.iter().map(|s| (s.y - exact(s.x)).abs()).fold(0.0, f64::max);
            errs.push(e);
        }
        let order = (errs[0] / errs[1]).log2();
        assert!((order - 2.0).abs() < 0.2, "{errs:?}");
    }

    #[test]
    fn linear_case_reproduces_constants_exactly() {
        let s = FdSecondOrderState::new(1.0, 0.1, 3.0, 3.0, 0.0).unwrap();
        let t = run(s, &StopCriteria::until(3.0, 1000));
        assert!(t.samples.iter().all(|s| (s.y - 3.0).abs() < 1e-12));
    }

    #[test]
    fn fails_near_fold() {
        // y = −2√(1 − x), fold at x = 1
        let exact = |x: f64| -2.0 * (1.0f64 - x).sqrt();
        let h = 0.01;
        let s = FdSecondOrderState::new(0.5, h, exact(0.5), exact(0.5 + h), 1.0).unwrap();
        let t = run(s, &StopCriteria::until(2.0, 10_000));
        assert!(matches!(t.termination, Termination::StepFailure { .. }), "{:?}", t.termination);
        assert!(t.last().unwrap().x < 1.0);
    }

    #[test]
    fn euler_is_first_order() {
        let exact = |x: f64| -2.0 * (1.0f64 - x).sqrt();
        let dexact = |x: f64| 1.0 / (1.0f64 - x).sqrt();
        let mut errs = Vec::new();
        for h in [0.01, 0.005] {
            let s = EulerSecondOrderState::new(0.1, h, exact(0.1), dexact(0.1), 1.0).unwrap();
            let t = run(s, &StopCriteria::until(0.5 - 1e-9, 10_000));
            let l = t.last().unwrap();
            errs.push((l.y - exact(l.x)).abs());
        }
        let order = (errs[0] / errs[1]).log2();
        assert!((order - 1.0).abs() < 0.2, "{errs:?}");
    }

    #[test]
    fn third_order_newton_converges_with_zero_alpha() {
        let rhs = InvariantRhs::PowerLaw { alpha: 0.0 };
        let s = FdThirdOrderState::from_jet(1.0, 1.0, 1.0, 0.1, 0.01, rhs).unwrap();
        let t = run(s, &StopCriteria::until(1.5, 1000));
        assert_eq!(t.termination, Termination::XMax);
    }
}
