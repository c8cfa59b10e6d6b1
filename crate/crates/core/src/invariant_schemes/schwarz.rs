//! Möbius-invariant scheme for the Schwarzian equation `S(y) = F(x)` on the
//! uniform lattice `x_n = x0 + n h`.
//!
//! The scheme sets the cross-ratio of four consecutive values to
//! `K_n = 4[1 − (h²/2) F(x_n + h/2)]`, which is linear in `y_{n+2}`:
//! `y_{n+2} = [K (y_n − y_{n−1}) y_{n+1} − (y_{n+1} − y_{n−1}) y_n] / [K (y_n − y_{n−1}) − (y_{n+1} − y_{n−1})]`.
//!
//! The state is generic over [`Real`] so exactness on Möbius data can be
//! checked in extended precision.

use super::{Monitor, Scheme};
use crate::error::{Error, Result, StepSignal};
use crate::geometry::{Point2, DEGENERACY_TOL};
use crate::ode::SchwarzRhs;
use crate::precision::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct SchwarzState<R: Real = f64> {
    /// Values at lattice indices `n−1, n, n+1`.
    pub y: [R; 3],
    pub x0: f64,
    pub h: f64,
    /// Lattice index of `y[2]`.
    pub index: usize,
    pub rhs: SchwarzRhs,
}

fn distinct<R: Real>(a: R, b: R) -> bool {
    let d = (b - a).abs().to_f64();
    d > DEGENERACY_TOL * a.abs().to_f64().max(b.abs().to_f64())
}

impl<R: Real> SchwarzState<R> {
    /// State holding `y` at `x0, x0 + h, x0 + 2h`.
    pub fn new(x0: f64, h: f64, y: [R; 3], rhs: SchwarzRhs) -> Result<Self> {
        if !(h > 0.0) || !x0.is_finite() {
            return Err(Error::Config(format!("need finite x0 and h > 0, got x0 = {x0}, h = {h}")));
        }
        if !distinct(y[0], y[1]) || !distinct(y[1], y[2]) {
            return Err(Error::Config("consecutive seed values must be distinct".into()));
        }
        Ok(Self {
            y,
            x0,
            h,
            index: 2,
            rhs,
        })
    }

    pub fn x_at(&self, index: usize) -> f64 {
        self.x0 + index as f64 * self.h
    }

    /// `K_n` for the stencil whose newest known point is `y[2]`.
    pub fn k_n(&self) -> R {
        let xn = self.x_at(self.index - 1);
        let f = self.rhs.eval(xn + 0.5 * self.h);
        let h = R::from_f64(self.h);
        R::from_f64(4.0) * (R::from_f64(1.0) - R::from_f64(0.5) * h * h * R::from_f64(f))
    }

    pub fn step(&self) -> Result<Self, StepSignal> {
        let [ym, yn, yp] = self.y;
        let x = self.x_at(self.index);
        if !distinct(ym, yn) || !distinct(yn, yp) {
            return Err(StepSignal::Domain {
                x,
                reason: "repeated consecutive values".into(),
            });
        }
        let k = self.k_n();
        let d0 = yn - ym;
        let d1 = yp - ym;
        let kd0 = k * d0;
        let den = kd0 - d1;
        let scale = kd0.abs().to_f64().max(d1.abs().to_f64());
        if !(den.abs().to_f64() > DEGENERACY_TOL * scale) {
            return Err(StepSignal::Singularity { x });
        }
        let next = (kd0 * yp - d1 * yn) / den;
        if !next.is_finite() {
            return Err(StepSignal::Singularity { x });
        }
        Ok(Self {
            y: [yn, yp, next],
            index: self.index + 1,
            ..self.clone()
        })
    }
}

impl<R: Real> Scheme for SchwarzState<R> {
    fn id(&self) -> &'static str {
        "invariant_schwarzian"
    }

    fn window(&self) -> Vec<Point2> {
        (0..3)
            .map(|i| Point2::new(self.x_at(self.index + i - 2), self.y[i].to_f64()))
            .collect()
    }

    fn latest(&self) -> Point2 {
        Point2::new(self.x_at(self.index), self.y[2].to_f64())
    }

    fn step(&self) -> Result<Self, StepSignal> {
        SchwarzState::step(self)
    }

    fn monitor(&self) -> Monitor {
        Monitor::CrossRatio(self.rhs.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::cross_ratio_values;
    use crate::precision::DoubleDouble;

    const ZERO: SchwarzRhs = SchwarzRhs::Constant { value: 0.0 };

    #[test]
    fn linear_continuation_when_k_is_four() {
        let s = SchwarzState::new(0.0, 1.0, [0.0, 1.0, 2.0], ZERO).unwrap();
        assert_eq!(s.k_n(), 4.0);
        let n = s.step().unwrap();
        assert_eq!(n.y[2], 3.0);
        assert_eq!(n.latest(), Point2::new(3.0, 3.0));
    }

    #[test]
    fn new_point_realizes_target_cross_ratio() {
        let rhs = SchwarzRhs::Polynomial { coeffs: vec![0.5, -1.0] };
        let s = SchwarzState::new(0.2, 0.1, [1.0, 1.3, 1.5], rhs).unwrap();
        let n = s.step().unwrap();
        let r = cross_ratio_values([1.0, 1.3, 1.5, n.y[2]]).unwrap();
        assert!((r - s.k_n()).abs() < 1e-12);
    }

    #[test]
    fn exact_on_mobius_data_in_double_double() {
        let (a, b, c, d) = (1.0, 0.5, -0.3, 2.0);
        let h = 1e-2;
        let exact = |k: usize| {
            let x = DoubleDouble::from(h) * DoubleDouble::from(k as f64);
            (DoubleDouble::from(a) * x + DoubleDouble::from(b)) / (DoubleDouble::from(c) * x + DoubleDouble::from(d))
        };
        let mut s = SchwarzState::new(0.0, h, [exact(0), exact(1), exact(2)], ZERO).unwrap();
        for _ in 0..200 {
            s = s.step().unwrap();
        }
        let err = (s.y[2] - exact(s.index)).to_f64().abs();
        assert!(err < 1e-20, "{err}");
    }

    #[test]
    fn rejects_repeated_seeds() {
        assert!(SchwarzState::new(0.0, 0.1, [1.0, 1.0, 2.0], ZERO).is_err());
        assert!(SchwarzState::new(0.0, 0.0, [0.0, 1.0, 2.0], ZERO).is_err());
    }

    #[test]
    fn vanishing_denominator_is_a_singularity() {
        // K(y_n − y_{n−1}) = y_{n+1} − y_{n−1}: with K = 4, (0, 1, 4)
        let s = SchwarzState::new(0.0, 1.0, [0.0, 1.0, 4.0], ZERO).unwrap();
        assert!(matches!(s.step(), Err(StepSignal::Singularity { .. })));
    }
}
