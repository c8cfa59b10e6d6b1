//! The three ODEs and their right-hand sides.
//!
//! * second order: `2x y'' + y' = γ y'^3`, i.e. `I1c = γ`;
//! * third order: `I2c = F(I1c)`;
//! * Schwarzian: `S(y) = F(x)`.

use serde::{Deserialize, Serialize};

/// Right side `F` of the third-order invariant ODE `I2c = F(I1c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InvariantRhs {
    /// `F(z) = α z^{3/2}`, defined for `z >= 0`.
    PowerLaw { alpha: f64 },
    Constant { value: f64 },
    /// `F(z) = a + b z`.
    Affine { a: f64, b: f64 },
}

impl InvariantRhs {
    /// `F(z)`, or `None` outside the domain of `F`.
    pub fn eval(&self, z: f64) -> Option<f64> {
        match *self {
            InvariantRhs::PowerLaw { alpha } => (z >= 0.0).then(|| alpha * z * z.sqrt()),
            InvariantRhs::Constant { value } => Some(value),
            InvariantRhs::Affine { a, b } => Some(a + b * z),
        }
    }

    /// `F'(z)`, or `None` outside the domain of `F`.
    pub fn derivative(&self, z: f64) -> Option<f64> {
        match *self {
            InvariantRhs::PowerLaw { alpha } => (z >= 0.0).then(|| 1.5 * alpha * z.sqrt()),
            InvariantRhs::Constant { .. } => Some(0.0),
            InvariantRhs::Affine { b, .. } => Some(b),
        }
    }
}

/// Right side `F(x)` of the Schwarzian equation `S(y) = F(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SchwarzRhs {
    Constant { value: f64 },
    /// `F(x) = Σ c_k x^k`.
    Polynomial { coeffs: Vec<f64> },
}

impl SchwarzRhs {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            SchwarzRhs::Constant { value } => *value,
            SchwarzRhs::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Ode {
    SecondOrder { gamma: f64 },
    ThirdOrder { rhs: InvariantRhs },
    Schwarzian { rhs: SchwarzRhs },
}

impl Ode {
    pub fn order(&self) -> usize {
        match self {
            Ode::SecondOrder { .. } => 2,
            Ode::ThirdOrder { .. } | Ode::Schwarzian { .. } => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Ode::SecondOrder { .. } => "second_order",
            Ode::ThirdOrder { .. } => "third_order",
            Ode::Schwarzian { .. } => "schwarzian",
        }
    }

    /// Highest derivative as a function of `x` and the lower ones
    /// (`state = [y, y', ...]`, length = order).
    pub fn highest_derivative(&self, x: f64, state: &[f64]) -> Result<f64, String> {
        match self {
            Ode::SecondOrder { gamma } => {
                let p = state[1];
                if x == 0.0 {
                    return Err("equation is singular at x = 0".into());
                }
                Ok((gamma * p * p * p - p) / (2.0 * x))
            }
            Ode::ThirdOrder { rhs } => {
                let (p, q) = (state[1], state[2]);
                if p == 0.0 || x == 0.0 {
                    return Err(format!("singular point: x = {x}, y' = {p}"));
                }
                let z = (2.0 * x * q + p) / (p * p * p);
                let f = rhs
                    .eval(z)
                    .ok_or_else(|| format!("F undefined at I1c = {z} (x = {x})"))?;
                Ok((3.0 * q * q + f * p.powi(5) / (x * x)) / p)
            }
            Ode::Schwarzian { rhs } => {
                let (p, q) = (state[1], state[2]);
                if p == 0.0 {
                    return Err(format!("y' vanishes at x = {x}"));
                }
                Ok((rhs.eval(x) * p * p + 1.5 * q * q) / p)
            }
        }
    }
}
