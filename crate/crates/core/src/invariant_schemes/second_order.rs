//! Explicit, linear invariant scheme for `2x y'' + y' = γ y'^3`.
//!
//! The lattice keeps `I1` fixed and the scheme keeps `I2 = β = I1(γ I1²/4 + 2)`
//! fixed, which gives the closed-form update
//! `x_{n+1} = x_{n−1} [a/(β x_{n−1} − a)]²`,
//! `y_{n+1} = (β x_{n−1} y_n − a y_{n−1})/(β x_{n−1} − a)` with `a = y_n − y_{n−1}`.

use super::{Monitor, Scheme};
use crate::error::{Error, Result, StepSignal};
use crate::geometry::{j1_invariant, lattice_invariant, Point2, DEGENERACY_TOL};
use crate::numerics::rel_diff;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderState {
    pub prev: Point2,
    pub cur: Point2,
    pub beta: f64,
    pub gamma: f64,
    pub i1: f64,
}

impl SecondOrderState {
    pub fn new(p0: Point2, p1: Point2, gamma: f64) -> Result<Self> {
        if !(p0.x > 0.0) || !(p1.x > p0.x) {
            return Err(Error::Config(format!(
                "seeds need 0 < x0 < x1, got x0 = {}, x1 = {}",
                p0.x, p1.x
            )));
        }
        if p1.y == p0.y || !p0.y.is_finite() || !p1.y.is_finite() || !gamma.is_finite() {
            return Err(Error::Config("seeds need distinct finite y values (I1 = 0)".into()));
        }
        let i1 = lattice_invariant(p0, p1)?;
        Ok(Self {
            prev: p0,
            cur: p1,
            beta: i1 * (0.25 * gamma * i1 * i1 + 2.0),
            gamma,
            i1,
        })
    }

    pub fn from_xy(x0: f64, y0: f64, x1: f64, y1: f64, gamma: f64) -> Result<Self> {
        Self::new(Point2::new(x0, y0), Point2::new(x1, y1), gamma)
    }

    pub fn step(&self) -> Result<Self, StepSignal> {
        let a = self.cur.y - self.prev.y;
        let bx = self.beta * self.prev.x;
        let den = bx - a;
        if !(den.abs() > DEGENERACY_TOL * bx.abs().max(a.abs())) {
            return Err(StepSignal::Singularity { x: self.cur.x });
        }
        let r = a / den;
        let next = Point2::new(self.prev.x * r * r, (bx * self.cur.y - a * self.prev.y) / den);
        Ok(Self {
            prev: self.cur,
            cur: next,
            ..*self
        })
    }

    /// Relative residuals of the three laws across the step `self → next`:
    /// `I1` unchanged, `I2 = β`, `J1 = γ`.
    pub fn postcondition_residuals(&self, next: &Self) -> Result<[f64; 3]> {
        let i1_new = lattice_invariant(next.prev, next.cur)?;
        let i2_new = lattice_invariant(self.prev, next.cur)?;
        let j1 = j1_invariant(self.i1, i1_new, i2_new)?;
        Ok([
            rel_diff(i1_new, self.i1, 0.0),
            rel_diff(i2_new, self.beta, 0.0),
            rel_diff(j1, self.gamma, 1.0),
        ])
    }
}

impl Scheme for SecondOrderState {
    fn id(&self) -> &'static str {
        "invariant_second_order"
    }

    fn window(&self) -> Vec<Point2> {
        vec![self.prev, self.cur]
    }

    fn latest(&self) -> Point2 {
        self.cur
    }

    fn step(&self) -> Result<Self, StepSignal> {
        SecondOrderState::step(self)
    }

    fn monitor(&self) -> Monitor {
        Monitor::SecondOrder
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_example() {
        let s = SecondOrderState::from_xy(1.0, 0.0, 4.0, 2.0, 4.0).unwrap();
        assert_eq!(s.i1, 1.0);
        assert_eq!(s.beta, 3.0);
    }

    #[test]
    fn init_rejects_flat_seeds_and_bad_x() {
        assert!(matches!(
            SecondOrderState::from_xy(1.0, 2.0, 4.0, 2.0, 4.0),
            Err(Error::Config(_))
        ));
        assert!(SecondOrderState::from_xy(0.0, 0.0, 4.0, 2.0, 4.0).is_err());
        assert!(SecondOrderState::from_xy(4.0, 0.0, 1.0, 2.0, 4.0).is_err());
    }

    #[test]
    fn step_example_and_postconditions() {
        let s = SecondOrderState::from_xy(1.0, 0.0, 4.0, 2.0, 4.0).unwrap();
        let n = s.step().unwrap();
        assert_eq!(n.cur, Point2::new(4.0, 6.0));
        let res = s.postcondition_residuals(&n).unwrap();
        assert!(res.iter().all(|r| *r < 1e-14), "{res:?}");
    }

    #[test]
    fn vanishing_denominator_signals_singularity() {
        // β x_prev = a: choose γ so that β = 2 with I1 = 2
        let s = SecondOrderState {
            prev: Point2::new(1.0, 0.0),
            cur: Point2::new(1.0, 2.0),
            beta: 2.0,
            gamma: 0.0,
            i1: 2.0,
        };
        assert!(matches!(s.step(), Err(StepSignal::Singularity { .. })));
    }

    #[test]
    fn seeds_from_exact_solution_give_small_i1() {
        let y = |x: f64| 2.0 * (1.0f64 - x).sqrt();
        for h in [0.01, 0.001] {
            let s = SecondOrderState::from_xy(0.1, y(0.1), 0.1 + h, y(0.1 + h), 1.0).unwrap();
            assert!(s.i1.abs() < 20.0 * h && s.i1 < 0.0);
        }
    }
}
