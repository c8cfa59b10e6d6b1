//! Closed-form solutions of `2x y'' + y' = γ y'^3`.
//!
//! The two-parameter family is `y = y_b + σ (2/C) √(γ − C x)` for `C ≠ 0`,
//! whose two branches `σ = ±1` meet at the fold `x = γ/C`, and
//! `y = y_b + σ x/√γ` for `C = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderExact {
    pub gamma: f64,
    pub c: f64,
    pub y_b: f64,
    pub branch: Branch,
}

impl SecondOrderExact {
    pub fn new(gamma: f64, c: f64, y_b: f64, branch: Branch) -> Result<Self> {
        if !(gamma > 0.0) || !c.is_finite() || !y_b.is_finite() {
            return Err(Error::Config(format!("need γ > 0 and finite C, y_b (γ = {gamma}, C = {c})")));
        }
        Ok(Self { gamma, c, y_b, branch })
    }

    /// Solution whose fold sits at `x_b` (`C = γ/x_b`).
    pub fn from_fold(gamma: f64, x_b: f64, y_b: f64, branch: Branch) -> Result<Self> {
        if !(x_b != 0.0 && x_b.is_finite()) {
            return Err(Error::Config(format!("fold position {x_b} must be finite and nonzero")));
        }
        Self::new(gamma, gamma / x_b, y_b, branch)
    }

    /// The member of the family through `(x0, y0)` with slope `yp0`.
    pub fn fit_from_ic(gamma: f64, x0: f64, y0: f64, yp0: f64) -> Result<Self> {
        if !(x0 > 0.0) {
            return Err(Error::Config(format!("x0 = {x0} must be positive")));
        }
        if yp0 == 0.0 || !yp0.is_finite() {
            return Err(Error::Config("y'(x0) must be finite and nonzero".into()));
        }
        let c = (gamma - 1.0 / (yp0 * yp0)) / x0;
        if c.abs() <= 1e-14 * gamma / x0 {
            let branch = if yp0 > 0.0 { Branch::Plus } else { Branch::Minus };
            return Self::new(gamma, 0.0, y0 - yp0 * x0, branch);
        }
        let branch = if yp0 < 0.0 { Branch::Plus } else { Branch::Minus };
        Self::new(gamma, c, y0 + 2.0 / (c * yp0), branch)
    }

    pub fn with_branch(&self, branch: Branch) -> Self {
        Self { branch, ..*self }
    }

    /// Fold position `γ/C`; `None` for `C = 0` where both branches are straight lines.
    pub fn singularity_x(&self) -> Option<f64> {
        (self.c != 0.0).then(|| self.gamma / self.c)
    }

    fn radicand(&self, x: f64) -> Result<f64> {
        let r = self.gamma - self.c * x;
        if r < 0.0 {
            return Err(Error::Domain(format!("x = {x} lies beyond the fold at {}", self.gamma / self.c)));
        }
        Ok(r)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let s = self.branch.sign();
        if self.c == 0.0 {
            return Ok(self.y_b + s * x / self.gamma.sqrt());
        }
        Ok(self.y_b + s * (2.0 / self.c) * self.radicand(x)?.sqrt())
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        let s = self.branch.sign();
        if self.c == 0.0 {
            return Ok(s / self.gamma.sqrt());
        }
        Ok(-s / self.radicand(x)?.sqrt())
    }

    pub fn second_derivative(&self, x: f64) -> Result<f64> {
        let s = self.branch.sign();
        if self.c == 0.0 {
            return Ok(0.0);
        }
        Ok(-s * 0.5 * self.c / self.radicand(x)?.powf(1.5))
    }
}

/// Free-function form of [`SecondOrderExact::eval`].
pub fn exact_second_order(cfg: &SecondOrderExact, x: f64) -> Result<f64> {
    cfg.eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let e = SecondOrderExact::new(1.0, 1.0, 0.0, Branch::Plus).unwrap();
        assert_eq!(e.eval(0.0).unwrap(), 2.0);
        assert_eq!(e.singularity_x(), Some(1.0));
        let lin = SecondOrderExact::new(4.0, 0.0, 5.0, Branch::Plus).unwrap();
        assert_eq!(lin.eval(2.0).unwrap(), 6.0);
        assert_eq!(lin.singularity_x(), None);
        let fig1 = SecondOrderExact::new(150.0, std::f64::consts::E.powi(2), 5.0, Branch::Plus).unwrap();
        assert!((fig1.singularity_x().unwrap() - 20.3).abs() < 0.05);
    }

    #[test]
    fn branches_meet_at_fold() {
        let e = SecondOrderExact::new(150.0, std::f64::consts::E.powi(2), 5.0, Branch::Plus).unwrap();
        let xb = e.singularity_x().unwrap();
        assert_eq!(e.eval(xb).unwrap(), 5.0);
        assert_eq!(e.with_branch(Branch::Minus).eval(xb).unwrap(), 5.0);
        assert!(e.eval(xb * (1.0 + 1e-9)).is_err());
    }

    #[test]
    fn derivative_blows_up_at_fold() {
        let e = SecondOrderExact::new(0.5, 0.25, 1.0, Branch::Minus).unwrap();
        let xb = e.singularity_x().unwrap();
        assert!(e.derivative(xb - 1e-12 * xb).unwrap().abs() > 1e6);
    }

    #[test]
    fn fit_recovers_parameters() {
        let e = SecondOrderExact::new(3.0, 0.7, -1.5, Branch::Minus).unwrap();
        let x0 = 1.3;
        let f = SecondOrderExact::fit_from_ic(3.0, x0, e.eval(x0).unwrap(), e.derivative(x0).unwrap()).unwrap();
        assert!((f.c - 0.7).abs() < 1e-12 && (f.y_b + 1.5).abs() < 1e-12);
        assert_eq!(f.branch, Branch::Minus);
        let lin = SecondOrderExact::fit_from_ic(4.0, 1.0, 2.0, 0.5).unwrap();
        assert_eq!((lin.c, lin.y_b, lin.branch), (0.0, 1.5, Branch::Plus));
    }

    #[test]
    fn satisfies_ode_under_finite_differences() {
        for (gamma, c, branch) in [(1.0, 1.0, Branch::Plus), (150.0, 7.389, Branch::Minus), (2.0, -0.5, Branch::Plus)] {
            let e = SecondOrderExact::new(gamma, c, 0.3, branch).unwrap();
            let x = 0.4;
            let h = 1e-4;
            let (ym, yp) = (e.eval(x - h).unwrap(), e.eval(x + h).unwrap());
            let d1 = e.derivative(x).unwrap();
            let d2 = e.second_derivative(x).unwrap();
            assert!(((yp - ym) / (2.0 * h) - d1).abs() < 1e-6 * d1.abs().max(1.0));
            let lhs = 2.0 * x * d2 + d1;
            let rhs = gamma * d1 * d1 * d1;
            assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0), "{lhs} {rhs}");
        }
    }
}
