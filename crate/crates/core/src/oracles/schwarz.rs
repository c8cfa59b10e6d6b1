//! Exact solutions of `S(y) = F` for constant `F`.
//!
//! `y = u1/u2` where `u1, u2` solve `u'' + (F/2) u = 0`. With `F = 0` these are
//! exactly the Möbius functions `(a x + b)/(c x + d)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchwarzExact {
    pub f: f64,
    pub x0: f64,
    /// `u1(x0), u1'(x0)`; `u2(x0) = 1`.
    pub u1: (f64, f64),
    pub u2p: f64,
    /// Wronskian `u1' u2 − u1 u2'`, equal to `y'(x0)`.
    pub wronskian: f64,
}

impl SchwarzExact {
    pub fn fit(f: f64, x0: f64, y0: f64, yp0: f64, ypp0: f64) -> Result<Self> {
        if yp0 == 0.0 || !yp0.is_finite() || !f.is_finite() {
            return Err(Error::Config("need finite F and y'(x0) != 0".into()));
        }
        let u2p = -ypp0 / (2.0 * yp0);
        Ok(Self {
            f,
            x0,
            u1: (y0, yp0 + y0 * u2p),
            u2p,
            wronskian: yp0,
        })
    }

    /// Fundamental pair `(c, s)` with `c(0)=1, c'(0)=0, s(0)=0, s'(0)=1` at `t`.
    fn basis(&self, t: f64) -> (f64, f64) {
        let q = 0.5 * self.f;
        if q > 0.0 {
            let w = q.sqrt();
            ((w * t).cos(), (w * t).sin() / w)
        } else if q < 0.0 {
            let k = (-q).sqrt();
            ((k * t).cosh(), (k * t).sinh() / k)
        } else {
            (1.0, t)
        }
    }

    fn u2(&self, x: f64) -> f64 {
        let (c, s) = self.basis(x - self.x0);
        c + self.u2p * s
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let (c, s) = self.basis(x - self.x0);
        let u2 = c + self.u2p * s;
        if u2 == 0.0 {
            return Err(Error::Domain(format!("pole of the exact solution at x = {x}")));
        }
        Ok((self.u1.0 * c + self.u1.1 * s) / u2)
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        let u2 = self.u2(x);
        if u2 == 0.0 {
            return Err(Error::Domain(format!("pole of the exact solution at x = {x}")));
        }
        Ok(self.wronskian / (u2 * u2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{schwarzian, JetPoint};

    #[test]
    fn reproduces_mobius_function() {
        let m = |x: f64| (2.0 * x + 1.0) / (0.5 * x + 3.0);
        let d = |x: f64| (2.0 * 3.0 - 0.5) / (0.5 * x + 3.0f64).powi(2);
        let dd = |x: f64| -2.0 * 0.5 * 5.5 / (0.5 * x + 3.0f64).powi(3);
        let e = SchwarzExact::fit(0.0, 0.2, m(0.2), d(0.2), dd(0.2)).unwrap();
        for x in [0.0, 0.5, 2.0, 7.0] {
            assert!((e.eval(x).unwrap() - m(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn has_requested_schwarzian() {
        for f in [-2.0, 0.0, 1.5] {
            let e = SchwarzExact::fit(f, 0.0, 0.3, 1.2, -0.4).unwrap();
            let h = 1e-3;
            let x = 0.4;
            let y: Vec<f64> = (-2..=2).map(|k| e.eval(x + k as f64 * h).unwrap()).collect();
            let y1 = e.derivative(x).unwrap();
            let y2 = (y[3] - 2.0 * y[2] + y[1]) / (h * h);
            let y3 = (y[4] - 2.0 * y[3] + 2.0 * y[1] - y[0]) / (2.0 * h * h * h);
            let s = schwarzian(&JetPoint::new(x, y[2], y1, y2, y3)).unwrap();
            assert!((s - f).abs() < 1e-4, "{f}: {s}");
        }
    }
}
