//! Group actions of the two sl(2,R) realizations, continuous differential
//! invariants and discrete difference invariants.
//!
//! Two-dimensional realization: `X1 = ∂y`, `X2 = x∂x + y∂y`,
//! `X3 = 2xy∂x + y²∂y`, acting on the half plane `x > 0`.
//! One-dimensional realization: Möbius maps of `y` alone.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative size below which a denominator is treated as an analytic zero.
pub const DEGENERACY_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

impl From<(f64, f64)> for Point2 {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// A point together with derivatives of `y` up to third order.
/// Derivatives not needed by a given invariant may be left at zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JetPoint {
    pub x: f64,
    pub y: f64,
    pub y1: f64,
    pub y2: f64,
    pub y3: f64,
}

impl JetPoint {
    pub const fn new(x: f64, y: f64, y1: f64, y2: f64, y3: f64) -> Self {
        Self { x, y, y1, y2, y3 }
    }
}

/// Four consecutive lattice points `n−1, n, n+1, n+2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil4 {
    pub points: [Point2; 4],
}

impl Stencil4 {
    pub fn new(points: [Point2; 4]) -> Self {
        Self { points }
    }

    pub fn from_xy(xs: [f64; 4], ys: [f64; 4]) -> Self {
        Self {
            points: std::array::from_fn(|i| Point2::new(xs[i], ys[i])),
        }
    }

    pub fn ys(&self) -> [f64; 4] {
        self.points.map(|p| p.y)
    }

    /// Checks the two-dimensional working domain: all `x > 0`, strictly increasing.
    pub fn check_2d(&self) -> Result<()> {
        for p in &self.points {
            if !(p.x > 0.0) {
                return Err(Error::Domain(format!("x = {} outside x > 0", p.x)));
            }
        }
        if self.points.windows(2).any(|w| w[1].x <= w[0].x) {
            return Err(Error::Domain("stencil x-coordinates not strictly increasing".into()));
        }
        Ok(())
    }
}

fn is_degenerate(den: f64, scale: f64) -> bool {
    !(den.abs() > DEGENERACY_TOL * scale) || !den.is_finite()
}

/// Finite group element of the two-dimensional realization: the flow of `X1`
/// by `eps1`, then `X2` with scale factor `lam`, then `X3` by `t3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupElement2D {
    pub eps1: f64,
    pub lam: f64,
    pub t3: f64,
}

impl GroupElement2D {
    pub const IDENTITY: Self = Self {
        eps1: 0.0,
        lam: 1.0,
        t3: 0.0,
    };

    pub fn new(eps1: f64, lam: f64, t3: f64) -> Result<Self> {
        if !(lam > 0.0) || !eps1.is_finite() || !t3.is_finite() || !lam.is_finite() {
            return Err(Error::Domain(format!("invalid group parameters ({eps1}, {lam}, {t3})")));
        }
        Ok(Self { eps1, lam, t3 })
    }

    /// Applies the element to a point. Fails when the projective flow would
    /// cross its pole (`1 − t3·y <= 0` after the first two flows).
    pub fn apply(&self, p: Point2) -> Result<Point2> {
        let y = p.y + self.eps1;
        let (x, y) = (self.lam * p.x, self.lam * y);
        let den = 1.0 - self.t3 * y;
        if !(den > 0.0) {
            return Err(Error::Domain(format!("pole of X3 flow: 1 - t3*y = {den}")));
        }
        Ok(Point2::new(x / (den * den), y / den))
    }

    pub fn apply_all<const N: usize>(&self, pts: &[Point2; N]) -> Result<[Point2; N]> {
        let mut out = *pts;
        for (o, p) in out.iter_mut().zip(pts) {
            *o = self.apply(*p)?;
        }
        Ok(out)
    }
}

pub fn apply_2d(g: &GroupElement2D, p: Point2) -> Result<Point2> {
    g.apply(p)
}

/// Möbius map `y → (a y + b)/(c y + d)` normalized to unit determinant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupElement1D {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl GroupElement1D {
    pub const IDENTITY: Self = Self {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    /// Rescales `(a, b, c, d)` so that `ad − bc = 1`. A non-positive
    /// determinant cannot be normalized within SL(2,R).
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        let scale = (a * d).abs().max((b * c).abs());
        if !(det > DEGENERACY_TOL * scale) || !det.is_finite() {
            return Err(Error::Domain(format!("Möbius determinant {det} is not positive")));
        }
        let s = det.sqrt();
        Ok(Self {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        })
    }

    pub fn coefficients(&self) -> (f64, f64, f64, f64) {
        (self.a, self.b, self.c, self.d)
    }

    pub fn apply(&self, y: f64) -> Result<f64> {
        let den = self.c * y + self.d;
        if is_degenerate(den, (self.c * y).abs().max(self.d.abs())) {
            return Err(Error::Domain(format!("Möbius pole at y = {y}")));
        }
        Ok((self.a * y + self.b) / den)
    }
}

pub fn apply_1d(g: &GroupElement1D, y: f64) -> Result<f64> {
    g.apply(y)
}

fn require_slope(y1: f64) -> Result<()> {
    if y1 == 0.0 || !y1.is_finite() {
        return Err(Error::Domain(format!("y' = {y1} must be finite and nonzero")));
    }
    Ok(())
}

/// `I1c = (2x y'' + y')/y'^3`.
pub fn i1c(p: &JetPoint) -> Result<f64> {
    require_slope(p.y1)?;
    Ok((2.0 * p.x * p.y2 + p.y1) / (p.y1 * p.y1 * p.y1))
}

/// `I2c = x² (y' y''' − 3 y''²)/y'^5`.
pub fn i2c(p: &JetPoint) -> Result<f64> {
    require_slope(p.y1)?;
    Ok(p.x * p.x * (p.y1 * p.y3 - 3.0 * p.y2 * p.y2) / p.y1.powi(5))
}

/// Both continuous invariants of the two-dimensional realization.
pub fn cont_invariants_2d(p: &JetPoint) -> Result<(f64, f64)> {
    Ok((i1c(p)?, i2c(p)?))
}

/// Schwarzian derivative `(y' y''' − 1.5 y''²)/y'²`.
pub fn schwarzian(p: &JetPoint) -> Result<f64> {
    require_slope(p.y1)?;
    Ok((p.y1 * p.y3 - 1.5 * p.y2 * p.y2) / (p.y1 * p.y1))
}

/// Two-point lattice invariant `(y_b − y_a)/√(x_a x_b)`.
///
/// Applied to neighbours it is `I1`; applied to points two apart it is `I2`.
pub fn lattice_invariant(a: Point2, b: Point2) -> Result<f64> {
    if !(a.x > 0.0) || !(b.x > 0.0) {
        return Err(Error::Domain(format!("lattice invariant needs x > 0, got {} and {}", a.x, b.x)));
    }
    Ok((b.y - a.y) / (a.x * b.x).sqrt())
}

/// The five difference invariants of a four-point stencil.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffInvariants {
    pub i1n: f64,
    pub i1n1: f64,
    pub i1n2: f64,
    pub i2n1: f64,
    pub i2n2: f64,
}

impl DiffInvariants {
    pub fn as_array(&self) -> [f64; 5] {
        [self.i1n, self.i1n1, self.i1n2, self.i2n1, self.i2n2]
    }

    /// `J1` at level `n+1` (points `n−1, n, n+1`).
    pub fn j1a(&self) -> Result<f64> {
        j1_invariant(self.i1n, self.i1n1, self.i2n1)
    }

    /// `J1` at level `n+2` (points `n, n+1, n+2`).
    pub fn j1b(&self) -> Result<f64> {
        j1_invariant(self.i1n1, self.i1n2, self.i2n2)
    }

    pub fn k(&self) -> Result<f64> {
        k_invariant(self.j1a()?, self.j1b()?, self.i1n, self.i1n1, self.i1n2)
    }
}

pub fn diff_invariants_2d(s: &Stencil4) -> Result<DiffInvariants> {
    let [p0, p1, p2, p3] = s.points;
    Ok(DiffInvariants {
        i1n: lattice_invariant(p0, p1)?,
        i1n1: lattice_invariant(p1, p2)?,
        i1n2: lattice_invariant(p2, p3)?,
        i2n1: lattice_invariant(p0, p2)?,
        i2n2: lattice_invariant(p1, p3)?,
    })
}

/// `J1 = 8 (I2 − (I1a + I1b)) / (I1a I1b (I1a + I1b))`; tends to `I1c`.
pub fn j1_invariant(i1a: f64, i1b: f64, i2: f64) -> Result<f64> {
    let sum = i1a + i1b;
    if i1a == 0.0 || i1b == 0.0 || is_degenerate(sum, i1a.abs() + i1b.abs()) {
        return Err(Error::DegenerateStencil(format!(
            "J1 denominator vanishes (I1 = {i1a}, {i1b})"
        )));
    }
    Ok(8.0 * (i2 - sum) / (i1a * i1b * sum))
}

/// `K = (3/2)(J1b − J1a)/(I1n + I1n1 + I1n2)`; tends to `I2c`.
pub fn k_invariant(j1a: f64, j1b: f64, i1n: f64, i1n1: f64, i1n2: f64) -> Result<f64> {
    let sum = i1n + i1n1 + i1n2;
    if is_degenerate(sum, i1n.abs() + i1n1.abs() + i1n2.abs()) {
        return Err(Error::DegenerateStencil("K denominator vanishes".into()));
    }
    Ok(1.5 * (j1b - j1a) / sum)
}

/// Möbius-invariant cross-ratio of four consecutive values
/// `(y3 − y1)(y2 − y0) / ((y3 − y2)(y1 − y0))`.
pub fn cross_ratio_values(y: [f64; 4]) -> Result<f64> {
    let d10 = y[1] - y[0];
    let d32 = y[3] - y[2];
    for (i, d) in [d10, y[2] - y[1], d32].into_iter().enumerate() {
        if is_degenerate(d, y[i].abs().max(y[i + 1].abs())) {
            return Err(Error::DegenerateStencil(format!("repeated value y[{i}] = y[{}]", i + 1)));
        }
    }
    Ok((y[3] - y[1]) * (y[2] - y[0]) / (d32 * d10))
}

pub fn cross_ratio(s: &Stencil4) -> Result<f64> {
    cross_ratio_values(s.ys())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn identity_action() {
        let p = GroupElement2D::IDENTITY.apply(Point2::new(2.0, 3.0)).unwrap();
        assert_eq!(p, Point2::new(2.0, 3.0));
        assert_eq!(GroupElement1D::IDENTITY.apply(7.0).unwrap(), 7.0);
    }

    #[test]
    fn projective_flow_matches_integrated_vector_field() {
        // integrate dx/dt = 2xy, dy/dt = y² with RK4 from (1,1) to t = 0.5
        let (mut x, mut y) = (1.0f64, 1.0f64);
        let n = 20_000;
        let dt = 0.5 / n as f64;
        let f = |x: f64, y: f64| (2.0 * x * y, y * y);
        for _ in 0..n {
            let k1 = f(x, y);
            let k2 = f(x + 0.5 * dt * k1.0, y + 0.5 * dt * k1.1);
            let k3 = f(x + 0.5 * dt * k2.0, y + 0.5 * dt * k2.1);
            let k4 = f(x + dt * k3.0, y + dt * k3.1);
            x += dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            y += dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        }
        let g = GroupElement2D::new(0.0, 1.0, 0.5).unwrap();
        let p = g.apply(Point2::new(1.0, 1.0)).unwrap();
        assert!(close(p.x, x, 1e-9) && close(p.y, y, 1e-9), "{p:?} vs ({x}, {y})");
        assert!(close(p.x, 4.0, 1e-15) && close(p.y, 2.0, 1e-15));
    }

    #[test]
    fn translate_then_scale() {
        let g = GroupElement2D::new(1.0, 2.0, 0.0).unwrap();
        assert_eq!(g.apply(Point2::new(1.0, 0.0)).unwrap(), Point2::new(2.0, 2.0));
    }

    #[test]
    fn pole_crossing_is_rejected() {
        let g = GroupElement2D::new(0.0, 1.0, 1.0).unwrap();
        assert!(matches!(g.apply(Point2::new(1.0, 1.0)), Err(Error::Domain(_))));
        assert!(GroupElement2D::new(0.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn mobius_examples() {
        let inv = GroupElement1D::new(0.0, 1.0, -1.0, 0.0).unwrap();
        assert!(close(inv.apply(2.0).unwrap(), -0.5, 1e-15));
        let shift = GroupElement1D::new(1.0, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(shift.apply(0.0).unwrap(), 1.0);
        assert!(inv.apply(0.0).is_err());
        assert!(GroupElement1D::new(1.0, 2.0, 2.0, 4.0).is_err());
        let (a, b, c, d) = GroupElement1D::new(2.0, 1.0, 1.0, 2.0).unwrap().coefficients();
        assert!(close(a * d - b * c, 1.0, 1e-15));
    }

    #[test]
    fn continuous_invariant_examples() {
        assert_eq!(i1c(&JetPoint::new(1.0, 0.0, 1.0, 1.0, 0.0)).unwrap(), 3.0);
        assert_eq!(i2c(&JetPoint::new(1.0, 0.0, 1.0, 0.0, 1.0)).unwrap(), 1.0);
        let (a, b) = cont_invariants_2d(&JetPoint::new(3.7, 1.0, 2.0, 0.0, 0.0)).unwrap();
        assert_eq!((a, b), (0.25, 0.0));
        assert!(i1c(&JetPoint::new(1.0, 0.0, 0.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn schwarzian_examples() {
        assert_eq!(schwarzian(&JetPoint::new(1.0, 1.0, -1.0, 2.0, -6.0)).unwrap(), 0.0);
        assert_eq!(schwarzian(&JetPoint::new(0.0, 0.0, 1.0, 0.0, 2.0)).unwrap(), 2.0);
        assert_eq!(schwarzian(&JetPoint::new(0.0, 0.0, 2.0, 2.0, 3.0)).unwrap(), 0.0);
        assert!(schwarzian(&JetPoint::new(0.0, 0.0, 0.0, 2.0, 3.0)).is_err());
    }

    #[test]
    fn difference_invariant_examples() {
        let s = Stencil4::from_xy([1.0, 4.0, 9.0, 16.0], [0.0, 2.0, 5.0, 9.0]);
        let inv = diff_invariants_2d(&s).unwrap();
        assert_eq!(inv.i1n, 1.0);
        assert_eq!(inv.i2n1, 5.0 / 3.0);
        let flat = Stencil4::from_xy([1.0, 2.0, 3.0, 4.0], [2.0; 4]);
        assert!(diff_invariants_2d(&flat).unwrap().as_array().iter().all(|v| *v == 0.0));
        let bad = Stencil4::from_xy([-1.0, 2.0, 3.0, 4.0], [0.0, 1.0, 2.0, 3.0]);
        assert!(diff_invariants_2d(&bad).is_err());
        assert!(bad.check_2d().is_err());
        assert!(s.check_2d().is_ok());
    }

    #[test]
    fn j1_and_k_examples() {
        assert_eq!(j1_invariant(1.0, 1.0, 3.0).unwrap(), 4.0);
        assert_eq!(j1_invariant(0.5, 0.25, 0.75).unwrap(), 0.0);
        assert!(matches!(j1_invariant(1.0, -1.0, 3.0), Err(Error::DegenerateStencil(_))));
        assert!(j1_invariant(0.0, 1.0, 3.0).is_err());
        assert_eq!(k_invariant(0.5, 0.5, 1.0, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(k_invariant(0.0, 2.0, 1.0, 1.0, 1.0).unwrap(), 1.0);
        assert!(k_invariant(0.0, 2.0, 1.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn cross_ratio_examples() {
        assert_eq!(cross_ratio_values([0.0, 1.0, 2.0, 3.0]).unwrap(), 4.0);
        assert_eq!(cross_ratio_values([0.0, 1.0, 3.0, 7.0]).unwrap(), 4.5);
        let g = GroupElement1D::new(1.0, 1.0, 1.0, 2.0).unwrap();
        let ys = [0.0, 1.0, 2.0, 3.0].map(|y| g.apply(y).unwrap());
        assert!(close(cross_ratio_values(ys).unwrap(), 4.0, 1e-14));
        assert!(cross_ratio_values([0.0, 1.0, 1.0, 3.0]).is_err());
    }

    #[test]
    fn j1_tends_to_i1c_with_order_two_on_invariant_lattice() {
        // exact solution y = yb − (2/C)√(γ − C x) with γ = 2, C = 1, sampled on
        // a lattice with constant I1 (built by root-finding each next x)
        let (gamma, c) = (2.0, 1.0);
        let y = |x: f64| -(2.0 / c) * (gamma - c * x).sqrt();
        let x0 = 0.5;
        let yp = 1.0 / (gamma - c * x0).sqrt();
        let ypp = 0.5 * c / (gamma - c * x0).powf(1.5);
        let target = i1c(&JetPoint::new(x0, y(x0), yp, ypp, 0.0)).unwrap();
        assert!(close(target, gamma, 1e-12));
        let mut errs = Vec::new();
        let hs = [0.02, 0.01, 0.005];
        for &h in &hs {
            let p0 = Point2::new(x0 - h, y(x0 - h));
            let p1 = Point2::new(x0, y(x0));
            let i = lattice_invariant(p0, p1).unwrap();
            let x2 = crate::numerics::brent(
                |x| lattice_invariant(p1, Point2::new(x, y(x))).unwrap() - i,
                x0 + 0.5 * h,
                x0 + 2.0 * h,
                1e-16,
                200,
            )
            .unwrap();
            let i2 = lattice_invariant(p0, Point2::new(x2, y(x2))).unwrap();
            let j = j1_invariant(i, i, i2).unwrap();
            errs.push((j - gamma).abs());
        }
        let slope = (errs[0] / errs[2]).ln() / (hs[0] / hs[2]).ln();
        assert!((slope - 2.0).abs() < 0.2, "slope {slope}, errs {errs:?}");
    }
}
