//! Semi-analytic solution of the third-order equation with `F(z) = α z^{3/2}`.
//!
//! With `f = y''/y'` and `s = √(2x f + 1)` the equation reduces to the
//! separable first-order equation `2x s' = s(s² + 2α s − 1)` (with `α`
//! replaced by `α·sign(y')`). Its integral is
//!
//! `Φ(s) = |s − r1|^{(α+q)/q} |s − r2|^{(q−α)/q} / s² = K x`,
//!
//! where `q = √(α² + 1)` and `r1,2 = −α ± q`. Equivalently `f` solves the fixed
//! point equation `f = (1/2x)[G(√(2xf + 1))/(K x) − 1]` with `G(s) = s² Φ(s)`.
//! `Φ` decreases on `(0, r1)` and increases on `(r1, ∞)` towards 1, so the upper
//! branch ends in a fold at `x = 1/K`. Then `y' = C1 exp(∫ f)` and
//! `y = y0 + C1 ∫ exp(∫ f)`, both integrals starting at the fit point.

use serde::{Deserialize, Serialize};

use super::quadrature::integrate;
use crate::error::{Error, Result};
use crate::numerics::brent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImplicitBranch {
    /// `0 < s < r1`: no fold for `x > 0`.
    Lower,
    /// `s > r1`: fold at `x = 1/K`.
    Upper,
}

/// Tolerance for each quadrature sub-problem in [`ThirdOrderImplicit::reconstruct_y`].
pub const QUAD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThirdOrderImplicit {
    /// `α` of the equation (not sign-adjusted).
    pub alpha: f64,
    pub k: f64,
    /// `y'` at the reference point.
    pub c1: f64,
    /// `y` at the reference point.
    pub y0: f64,
    /// Lower limit of both integrals.
    pub x_ref: f64,
    pub branch: ImplicitBranch,
}

struct Roots {
    r1: f64,
    r2: f64,
    e1: f64,
    e2: f64,
}

fn roots(alpha: f64) -> Roots {
    let q = (alpha * alpha + 1.0).sqrt();
    Roots {
        r1: -alpha + q,
        r2: -alpha - q,
        e1: (alpha + q) / q,
        e2: (q - alpha) / q,
    }
}

/// `ln Φ(s)` for the sign-adjusted `α`.
pub fn ln_phi(s: f64, alpha: f64) -> f64 {
    let r = roots(alpha);
    r.e1 * (s - r.r1).abs().ln() + r.e2 * (s - r.r2).abs().ln() - 2.0 * s.ln()
}

pub fn phi(s: f64, alpha: f64) -> f64 {
    ln_phi(s, alpha).exp()
}

/// Residual of the fixed-point form `f − (1/2x)[G(√(2xf+1))/(Kx) − 1]`.
pub fn functional_residual(x: f64, f: f64, alpha: f64, k: f64) -> f64 {
    let s2 = 2.0 * x * f + 1.0;
    if s2 <= 0.0 {
        return f64::NAN;
    }
    let s = s2.sqrt();
    let g = s2 * phi(s, alpha);
    f - (g / (k * x) - 1.0) / (2.0 * x)
}

/// Solves for `s` with `Φ(s) = Kx` on the given branch.
fn solve_s(x: f64, alpha: f64, k: f64, branch: ImplicitBranch) -> Result<f64> {
    if !(x > 0.0) || !(k > 0.0) {
        return Err(Error::OracleUnavailable(format!("need x > 0 and K > 0 (x = {x}, K = {k})")));
    }
    let r = roots(alpha);
    let target = (k * x).ln();
    let g = |s: f64| ln_phi(s, alpha) - target;
    let (lo, hi) = match branch {
        ImplicitBranch::Upper => {
            if k * x >= 1.0 {
                return Err(Error::OracleUnavailable(format!(
                    "x = {x} lies beyond the fold at 1/K = {}",
                    1.0 / k
                )));
            }
            let mut hi = r.r1 + 1.0;
            let mut lo = r.r1;
            while g(hi) < 0.0 {
                lo = hi;
                hi *= 2.0;
                if hi > 1e150 {
                    return Err(Error::OracleUnavailable(format!("no bracket for s at x = {x}")));
                }
            }
            (lo, hi)
        }
        ImplicitBranch::Lower => {
            let mut lo = 0.5 * r.r1;
            let mut hi = r.r1;
            while g(lo) < 0.0 {
                hi = lo;
                lo *= 0.5;
                if lo < 1e-150 {
                    return Err(Error::OracleUnavailable(format!("no bracket for s at x = {x}")));
                }
            }
            (lo, hi)
        }
    };
    // the endpoint at r1 evaluates to −∞; nudge inside the open interval
    let nudge = |v: f64| if v == r.r1 { v * (1.0 + 1e-15) + 1e-300 } else { v };
    let (lo, hi) = match branch {
        ImplicitBranch::Upper => (nudge(lo), hi),
        ImplicitBranch::Lower => (lo, if hi == r.r1 { r.r1 * (1.0 - 1e-15) } else { hi }),
    };
    brent(g, lo, hi, 1e-16 * hi.abs(), 300)
        .ok_or_else(|| Error::OracleUnavailable(format!("root search for s failed at x = {x}")))
}

/// `f(x) = y''/y'` on the requested branch, for sign-adjusted `α`.
pub fn solve_f(x: f64, alpha: f64, k: f64, branch: ImplicitBranch) -> Result<f64> {
    let s = solve_s(x, alpha, k, branch)?;
    Ok((s * s - 1.0) / (2.0 * x))
}

impl ThirdOrderImplicit {
    /// Matches the solution to `(y0, y'0, y''0)` at `x0`.
    pub fn fit_constants(alpha: f64, x0: f64, y0: f64, yp0: f64, ypp0: f64) -> Result<Self> {
        if yp0 == 0.0 || !yp0.is_finite() {
            return Err(Error::Config("y'(x0) must be finite and nonzero".into()));
        }
        if !(x0 > 0.0) {
            return Err(Error::Config(format!("x0 = {x0} must be positive")));
        }
        let s2 = 2.0 * x0 * ypp0 / yp0 + 1.0;
        if !(s2 > 0.0) {
            return Err(Error::OracleUnavailable(
                "2x y''/y' + 1 must be positive for a real solution".into(),
            ));
        }
        let s0 = s2.sqrt();
        let a = alpha * yp0.signum();
        let r = roots(a);
        if (s0 - r.r1).abs() <= 1e-14 * r.r1 {
            return Err(Error::OracleUnavailable("initial data give K = 0".into()));
        }
        let branch = if s0 > r.r1 {
            ImplicitBranch::Upper
        } else {
            ImplicitBranch::Lower
        };
        Ok(Self {
            alpha,
            k: phi(s0, a) / x0,
            c1: yp0,
            y0,
            x_ref: x0,
            branch,
        })
    }

    /// `α·sign(y')`, the coefficient in the reduced equation.
    pub fn alpha_eff(&self) -> f64 {
        self.alpha * self.c1.signum()
    }

    pub fn fold_x(&self) -> Option<f64> {
        (self.branch == ImplicitBranch::Upper).then(|| 1.0 / self.k)
    }

    pub fn f(&self, x: f64) -> Result<f64> {
        solve_f(x, self.alpha_eff(), self.k, self.branch)
    }

    pub fn residual(&self, x: f64) -> Result<f64> {
        let f = self.f(x)?;
        Ok(functional_residual(x, f, self.alpha_eff(), self.k))
    }

    fn int_f(&self, a: f64, b: f64) -> Result<f64> {
        Ok(integrate(|t| self.f(t), a, b, QUAD_TOL)?.0)
    }

    /// `(y', y'')` at `x`.
    pub fn derivatives(&self, x: f64) -> Result<(f64, f64)> {
        let yp = self.c1 * self.int_f(self.x_ref, x)?.exp();
        Ok((yp, self.f(x)? * yp))
    }

    /// `y` on `grid` by nested quadrature; the grid may be in any order and on
    /// either side of the reference point.
    pub fn reconstruct_y(&self, grid: &[f64]) -> Result<Vec<f64>> {
        if self.c1 == 0.0 {
            return Ok(vec![self.y0; grid.len()]);
        }
        let mut out = vec![f64::NAN; grid.len()];
        let mut idx: Vec<usize> = (0..grid.len()).collect();
        idx.sort_by(|&a, &b| grid[a].total_cmp(&grid[b]));
        let (below, above): (Vec<usize>, Vec<usize>) = idx.into_iter().partition(|&i| grid[i] < self.x_ref);
        for order in [above, below.into_iter().rev().collect::<Vec<_>>()] {
            // march outward from the reference point, carrying ∫f and y
            let mut xa = self.x_ref;
            let mut lf = 0.0;
            let mut y = self.y0;
            for i in order {
                let xb = grid[i];
                let outer = integrate(|t| Ok((lf + self.int_f(xa, t)?).exp()), xa, xb, QUAD_TOL)?.0;
                y += self.c1 * outer;
                lf += self.int_f(xa, xb)?;
                xa = xb;
                out[i] = y;
            }
        }
        Ok(out)
    }
}
