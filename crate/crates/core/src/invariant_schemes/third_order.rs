//! Invariant schemes for the third-order equation `I2c = F(I1c)`.
//!
//! The scheme is `K^{n+2} = F(J1^{n+1})` together with a lattice law on `I1`:
//! * strict: `I1^{n+2} = I1^{n+1}`, explicit update through `ω`;
//! * γ-lattice: `I1^{n+2} = γ_lat · I1^{n+1}`;
//! * implicit: `K^{n+2} = F((J1^{n+1} + J1^{n+2})/2)` on the strict lattice.
//!
//! Given the target `J1^{n+2}`, both lattice invariants of the new point are
//! known, and the new point follows from two linear equations in `√x_{n+2}`.

use serde::{Deserialize, Serialize};

use super::{domain_signal, Monitor, Scheme};
use crate::error::{Error, Result, StepSignal};
use crate::geometry::{j1_invariant, k_invariant, lattice_invariant, Point2};
use crate::numerics::{brent, rel_diff};
use crate::ode::{InvariantRhs, Ode};

pub const NEWTON_MAX_ITER: usize = 50;
pub const NEWTON_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThirdOrderMode {
    Strict,
    GammaLattice,
    Implicit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThirdOrderState {
    /// Points `n−1, n, n+1`.
    pub pts: [Point2; 3],
    pub rhs: InvariantRhs,
    pub mode: ThirdOrderMode,
    /// Lattice ratio `I1^{n+1}/I1^n`; 1 for the strict and implicit modes.
    pub gamma_lat: f64,
}

/// Cubic Taylor polynomial of a solution of `I2c = F(I1c)` at `x0`.
#[derive(Debug, Clone, Copy)]
pub struct TaylorSeed {
    pub x0: f64,
    pub y0: f64,
    pub yp0: f64,
    pub ypp0: f64,
    pub yppp0: f64,
}

impl TaylorSeed {
    pub fn new(x0: f64, y0: f64, yp0: f64, ypp0: f64, rhs: InvariantRhs) -> Result<Self> {
        if !(x0 > 0.0) {
            return Err(Error::Config(format!("x0 = {x0} must be positive")));
        }
        if yp0 == 0.0 || !yp0.is_finite() {
            return Err(Error::Config("y'(x0) must be nonzero (I1c undefined)".into()));
        }
        let yppp0 = Ode::ThirdOrder { rhs }
            .highest_derivative(x0, &[y0, yp0, ypp0])
            .map_err(Error::Config)?;
        Ok(Self {
            x0,
            y0,
            yp0,
            ypp0,
            yppp0,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let d = x - self.x0;
        self.y0 + d * (self.yp0 + d * (0.5 * self.ypp0 + d * self.yppp0 / 6.0))
    }

    pub fn point(&self, x: f64) -> Point2 {
        Point2::new(x, self.eval(x))
    }
}

/// New point `c` with `I1(b, c) = a_target` and `I2(a, c) = b_target`.
/// `None` when `√x_c` would be non-positive (the lattice passed through infinity).
pub fn lattice_update(a: Point2, b: Point2, a_target: f64, b_target: f64) -> Option<Point2> {
    let (sa, sb) = (a.x.sqrt(), b.x.sqrt());
    let u = (b.y - a.y) / (b_target * sa - a_target * sb);
    if !(u > 0.0) || !u.is_finite() {
        return None;
    }
    Some(Point2::new(u * u, b.y + a_target * sb * u))
}

impl ThirdOrderState {
    /// State from three given points. In γ-lattice mode the ratio of the two
    /// `I1` values is recorded; the other modes use ratio 1.
    pub fn from_points(pts: [Point2; 3], rhs: InvariantRhs, mode: ThirdOrderMode) -> Result<Self> {
        if !(pts[0].x > 0.0) || !(pts[1].x > pts[0].x) || !(pts[2].x > pts[1].x) {
            return Err(Error::Config("seed x values must be positive and increasing".into()));
        }
        let ia = lattice_invariant(pts[0], pts[1])?;
        let ib = lattice_invariant(pts[1], pts[2])?;
        if ia == 0.0 || ib == 0.0 {
            return Err(Error::Config("seeds with equal y values give I1 = 0".into()));
        }
        let gamma_lat = match mode {
            ThirdOrderMode::GammaLattice => ib / ia,
            _ => 1.0,
        };
        if !(gamma_lat > 0.0) {
            return Err(Error::Config(format!("lattice ratio {gamma_lat} must be positive")));
        }
        Ok(Self {
            pts,
            rhs,
            mode,
            gamma_lat,
        })
    }

    /// Seeds from the initial jet `(y0, y'0, y''0)` at `x0` with step `h`.
    ///
    /// The seeds lie on the cubic Taylor polynomial. Strict and implicit modes
    /// place the third seed at the x where its `I1` equals the first one, so the
    /// lattice law holds exactly; γ-lattice mode uses `x0 + 2h` and records the
    /// resulting ratio.
    pub fn init(
        x0: f64,
        y0: f64,
        yp0: f64,
        ypp0: f64,
        h: f64,
        rhs: InvariantRhs,
        mode: ThirdOrderMode,
    ) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::Config(format!("step h = {h} must be positive")));
        }
        let taylor = TaylorSeed::new(x0, y0, yp0, ypp0, rhs)?;
        let p0 = taylor.point(x0);
        let p1 = taylor.point(x0 + h);
        let p2 = match mode {
            ThirdOrderMode::GammaLattice => taylor.point(x0 + 2.0 * h),
            ThirdOrderMode::Strict | ThirdOrderMode::Implicit => {
                let i0 = lattice_invariant(p0, p1)?;
                let g = |x: f64| {
                    lattice_invariant(p1, taylor.point(x)).map(|i| i - i0).unwrap_or(f64::NAN)
                };
                let mut lo = p1.x + 0.25 * h;
                let mut found = None;
                while lo < p1.x + 8.0 * h {
                    let hi = lo + 0.25 * h;
                    if g(lo).signum() != g(hi).signum() {
                        found = brent(g, lo, hi, 1e-15 * hi, 200);
                        break;
                    }
                    lo = hi;
                }
                let x2 = found.ok_or_else(|| {
                    Error::Config("no third seed with equal I1 near x0 + 2h; reduce h".into())
                })?;
                taylor.point(x2)
            }
        };
        Self::from_points([p0, p1, p2], rhs, mode)
    }

    fn f_at(&self, z: f64, x: f64) -> Result<f64, StepSignal> {
        self.rhs.eval(z).ok_or_else(|| StepSignal::Domain {
            x,
            reason: format!("F undefined at J1 = {z}"),
        })
    }

    /// `(I1^n, I1^{n+1}, J1^{n+1})` of the current window.
    fn window_invariants(&self) -> Result<(f64, f64, f64), StepSignal> {
        let [p0, p1, p2] = self.pts;
        let x = p2.x;
        let ia = lattice_invariant(p0, p1).map_err(|e| domain_signal(x, e))?;
        let ib = lattice_invariant(p1, p2).map_err(|e| domain_signal(x, e))?;
        let i2 = lattice_invariant(p0, p2).map_err(|e| domain_signal(x, e))?;
        let ja = j1_invariant(ia, ib, i2).map_err(|e| domain_signal(x, e))?;
        Ok((ia, ib, ja))
    }

    fn advance(&self, next: Point2) -> Self {
        Self {
            pts: [self.pts[1], self.pts[2], next],
            ..*self
        }
    }

    /// Strict explicit step through `ω = [2 + (I²/4)(2I F + J1)] √(x_n/x_{n+1})`,
    /// `x_{n+2} = x_n/(1 − ω)²`, `y_{n+2} = (y_n − ω y_{n+1})/(1 − ω)`.
    pub fn step_explicit(&self) -> Result<Self, StepSignal> {
        let (_, i, ja) = self.window_invariants()?;
        let [_, pn, pn1] = self.pts;
        let f = self.f_at(ja, pn1.x)?;
        let omega = (2.0 + 0.25 * i * i * (2.0 * i * f + ja)) * (pn.x / pn1.x).sqrt();
        // √x_{n+2} = √x_n/(ω − 1) must be positive
        if !(omega - 1.0 > 1e-14 * omega.abs()) {
            return Err(StepSignal::Singularity { x: pn1.x });
        }
        let d = 1.0 - omega;
        let next = Point2::new(pn.x / (d * d), (pn.y - omega * pn1.y) / d);
        Ok(self.advance(next))
    }

    /// Explicit step on the γ-lattice `I1^{n+2} = γ_lat I1^{n+1}`.
    pub fn step_gamma(&self) -> Result<Self, StepSignal> {
        let (ia, ib, ja) = self.window_invariants()?;
        let x = self.pts[2].x;
        let ic = self.gamma_lat * ib;
        let jb = ja + (2.0 / 3.0) * (ia + ib + ic) * self.f_at(ja, x)?;
        self.finish(ib, ic, jb)
    }

    /// Implicit step `K^{n+2} = F((J1^{n+1} + J1^{n+2})/2)`, solved for `J1^{n+2}`
    /// by scalar Newton from the explicit prediction.
    pub fn step_implicit(&self) -> Result<Self, StepSignal> {
        let (ia, ib, ja) = self.window_invariants()?;
        let x = self.pts[2].x;
        let ic = self.gamma_lat * ib;
        let s = (2.0 / 3.0) * (ia + ib + ic);
        let mut jb = ja + s * self.f_at(ja, x)?;
        let mut converged = false;
        let mut last_update = f64::NAN;
        for _ in 0..NEWTON_MAX_ITER {
            let mid = 0.5 * (ja + jb);
            let g = jb - ja - s * self.f_at(mid, x)?;
            let dg = 1.0 - 0.5 * s * self.rhs.derivative(mid).unwrap_or(f64::NAN);
            let delta = g / dg;
            if !delta.is_finite() {
                break;
            }
            jb -= delta;
            last_update = delta;
            if delta.abs() <= NEWTON_TOL * (1.0 + jb.abs()) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(StepSignal::StepFailure {
                x,
                reason: format!("Newton for J1 did not converge (last update {last_update:e})"),
            });
        }
        self.finish(ib, ic, jb)
    }

    fn finish(&self, ib: f64, ic: f64, jb: f64) -> Result<Self, StepSignal> {
        let b = (ib + ic) + jb * ib * ic * (ib + ic) / 8.0;
        let [_, pn, pn1] = self.pts;
        match lattice_update(pn, pn1, ic, b) {
            Some(next) => Ok(self.advance(next)),
            None => Err(StepSignal::Singularity { x: pn1.x }),
        }
    }

    pub fn step(&self) -> Result<Self, StepSignal> {
        match self.mode {
            ThirdOrderMode::Strict => self.step_explicit(),
            ThirdOrderMode::GammaLattice => self.step_gamma(),
            ThirdOrderMode::Implicit => self.step_implicit(),
        }
    }

    /// Relative residuals across `self → next` of the lattice law and of
    /// `K^{n+2} = F(·)` for the mode's argument of `F`.
    pub fn postcondition_residuals(&self, next: &Self) -> Result<[f64; 2]> {
        let [p0, p1, p2] = self.pts;
        let p3 = next.pts[2];
        let ia = lattice_invariant(p0, p1)?;
        let ib = lattice_invariant(p1, p2)?;
        let ic = lattice_invariant(p2, p3)?;
        let ja = j1_invariant(ia, ib, lattice_invariant(p0, p2)?)?;
        let jb = j1_invariant(ib, ic, lattice_invariant(p1, p3)?)?;
        let k = k_invariant(ja, jb, ia, ib, ic)?;
        let arg = match self.mode {
            ThirdOrderMode::Implicit => 0.5 * (ja + jb),
            _ => ja,
        };
        let f = self
            .rhs
            .eval(arg)
            .ok_or_else(|| Error::Domain(format!("F undefined at {arg}")))?;
        Ok([rel_diff(ic, self.gamma_lat * ib, 0.0), rel_diff(k, f, 1.0)])
    }
}

impl Scheme for ThirdOrderState {
    fn id(&self) -> &'static str {
        match self.mode {
            ThirdOrderMode::Strict => "invariant_third_order_strict",
            ThirdOrderMode::GammaLattice => "invariant_third_order_gamma",
            ThirdOrderMode::Implicit => "invariant_third_order_implicit",
        }
    }

    fn window(&self) -> Vec<Point2> {
        self.pts.to_vec()
    }

    fn latest(&self) -> Point2 {
        self.pts[2]
    }

    fn step(&self) -> Result<Self, StepSignal> {
        ThirdOrderState::step(self)
    }

    fn monitor(&self) -> Monitor {
        Monitor::ThirdOrder
    }
}
