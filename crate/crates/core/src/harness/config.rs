//! Experiment settings from `key=value` text, named presets, and their
//! translation into a [`ProblemSpec`].
//!
//! Settings are layered: a preset provides defaults, command-line flags
//! override the preset, and a config file overrides both.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::emit::Format;
use super::problem::{InitialData, ProblemSpec, SchemeKind, DEFAULT_MAX_STEPS, DEFAULT_RK_TOL};
use crate::error::{Error, Result};
use crate::oracles::{Branch, SecondOrderExact};
use crate::ode::{InvariantRhs, Ode, SchwarzRhs};

pub const PRESETS: [&str; 4] = ["fig1", "fig2", "fig3", "convergence"];

/// Every field is optional so settings from several sources can be merged.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub ode: Option<String>,
    pub scheme: Option<SchemeKind>,
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
    /// Constant right side of the Schwarzian equation.
    pub f: Option<f64>,
    /// Polynomial right side `c0,c1,...` of the Schwarzian equation.
    pub f_coeffs: Option<Vec<f64>>,
    pub ic: Option<InitialData>,
    pub h: Option<f64>,
    pub h_list: Option<Vec<f64>>,
    pub x_max: Option<f64>,
    pub x_min: Option<f64>,
    pub through_fold: Option<bool>,
    pub max_steps: Option<usize>,
    pub rk_tol: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: '{v}' is not a number")))
}

pub fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|t| parse_f64(key, t)).collect()
}

impl Settings {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let key = key.trim().replace('-', "_");
        match key.as_str() {
            "ode" => self.ode = Some(v.to_string()),
            "scheme" => self.scheme = Some(v.parse()?),
            "gamma" => self.gamma = Some(parse_f64(&key, v)?),
            "alpha" => self.alpha = Some(parse_f64(&key, v)?),
            "f" => self.f = Some(parse_f64(&key, v)?),
            "f_coeffs" => self.f_coeffs = Some(parse_list(&key, v)?),
            "ic" => self.ic = Some(v.parse()?),
            "h" => self.h = Some(parse_f64(&key, v)?),
            "h_list" => self.h_list = Some(parse_list(&key, v)?),
            "x_max" => self.x_max = Some(parse_f64(&key, v)?),
            "x_min" => self.x_min = Some(parse_f64(&key, v)?),
            "through_fold" => {
                self.through_fold = Some(
                    v.parse()
                        .map_err(|_| Error::Config(format!("through_fold: '{v}' is not true/false")))?,
                )
            }
            "max_steps" => {
                self.max_steps = Some(
                    v.parse()
                        .map_err(|_| Error::Config(format!("max_steps: '{v}' is not a count")))?,
                )
            }
            "rk_tol" => self.rk_tol = Some(parse_f64(&key, v)?),
            "seed" => {
                self.seed = Some(
                    v.parse()
                        .map_err(|_| Error::Config(format!("seed: '{v}' is not an unsigned integer")))?,
                )
            }
            "out" => self.out = Some(PathBuf::from(v)),
            "format" => self.format = Some(v.parse()?),
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; blank lines and lines starting with `#` are skipped.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut s = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
            s.set(k, v).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("line {}: {m}", i + 1)),
                e => e,
            })?;
        }
        Ok(s)
    }

    /// `self` with every field that `other` sets replaced by `other`'s value.
    pub fn overridden_by(self, other: Settings) -> Settings {
        Settings {
            ode: other.ode.or(self.ode),
            scheme: other.scheme.or(self.scheme),
            gamma: other.gamma.or(self.gamma),
            alpha: other.alpha.or(self.alpha),
            f: other.f.or(self.f),
            f_coeffs: other.f_coeffs.or(self.f_coeffs),
            ic: other.ic.or(self.ic),
            h: other.h.or(self.h),
            h_list: other.h_list.or(self.h_list),
            x_max: other.x_max.or(self.x_max),
            x_min: other.x_min.or(self.x_min),
            through_fold: other.through_fold.or(self.through_fold),
            max_steps: other.max_steps.or(self.max_steps),
            rk_tol: other.rk_tol.or(self.rk_tol),
            seed: other.seed.or(self.seed),
            out: other.out.or(self.out),
            format: other.format.or(self.format),
        }
    }

    pub fn preset(name: &str) -> Result<Settings> {
        let mut s = Settings::default();
        match name {
            // second-order fold at x_b = γ/C ≈ 20.3, started on the increasing branch at x_b/2
            "fig1" => {
                let (gamma, c, y_b) = (150.0, std::f64::consts::E.powi(2), 5.0);
                let exact = SecondOrderExact::new(gamma, c, y_b, Branch::Minus)?;
                let x_b = gamma / c;
                let x0 = 0.5 * x_b;
                s.ode = Some("second_order".into());
                s.gamma = Some(gamma);
                s.ic = Some(InitialData::new(x0, exact.eval(x0)?, exact.derivative(x0)?, None));
                s.scheme = Some(SchemeKind::InvariantStrict);
                s.h = Some(0.02 * x_b);
                s.x_max = Some(2.0 * x_b);
                s.x_min = Some(x0);
                s.through_fold = Some(true);
            }
            "fig2" => {
                s.ode = Some("third_order".into());
                s.alpha = Some(-1.0);
                s.ic = Some(InitialData::new(1.0, 1.0, 10.0, Some(-4.0)));
                s.scheme = Some(SchemeKind::InvariantImplicit);
                s.h = Some(0.05);
                s.h_list = Some(vec![0.05, 0.025]);
                s.x_max = Some(4.0);
            }
            "fig3" => {
                s.ode = Some("third_order".into());
                s.alpha = Some(-1.0);
                s.ic = Some(InitialData::new(1.0, 1.0, 1.0, Some(3.0)));
                s.scheme = Some(SchemeKind::InvariantGamma);
                s.h = Some(0.01);
                s.x_max = Some(2.0);
                s.x_min = Some(1.0);
                s.through_fold = Some(true);
            }
            // y = 2√(1 − x): γ = 1, C = 1, y_b = 0
            "convergence" => {
                let x0 = 0.1f64;
                s.ode = Some("second_order".into());
                s.gamma = Some(1.0);
                s.ic = Some(InitialData::new(x0, 2.0 * (1.0 - x0).sqrt(), -1.0 / (1.0 - x0).sqrt(), None));
                s.scheme = Some(SchemeKind::InvariantStrict);
                s.h = Some(0.01);
                s.h_list = Some(vec![0.02, 0.01, 0.005, 0.0025]);
                s.x_max = Some(0.5);
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown preset '{other}' (available: {})",
                    PRESETS.join(", ")
                )))
            }
        }
        Ok(s)
    }

    pub fn ode(&self) -> Result<Ode> {
        let name = self.ode.as_deref().ok_or_else(|| Error::Config("no equation given (ode)".into()))?;
        match name {
            "second_order" => Ok(Ode::SecondOrder {
                gamma: self
                    .gamma
                    .ok_or_else(|| Error::Config("second_order needs gamma".into()))?,
            }),
            "third_order" => Ok(Ode::ThirdOrder {
                rhs: InvariantRhs::PowerLaw {
                    alpha: self
                        .alpha
                        .ok_or_else(|| Error::Config("third_order needs alpha".into()))?,
                },
            }),
            "schwarzian" => {
                let rhs = match (&self.f_coeffs, self.f) {
                    (Some(c), _) => SchwarzRhs::Polynomial { coeffs: c.clone() },
                    (None, Some(v)) => SchwarzRhs::Constant { value: v },
                    (None, None) => SchwarzRhs::Constant { value: 0.0 },
                };
                Ok(Ode::Schwarzian { rhs })
            }
            other => Err(Error::Config(format!(
                "unknown equation '{other}' (expected second_order, third_order or schwarzian)"
            ))),
        }
    }

    pub fn problem(&self) -> Result<ProblemSpec> {
        let ic = self.ic.ok_or_else(|| Error::Config("no initial data given (ic)".into()))?;
        let spec = ProblemSpec {
            ode: self.ode()?,
            ic,
            scheme: self.scheme.unwrap_or(SchemeKind::InvariantStrict),
            h: self
                .h
                .or_else(|| self.h_list.as_ref().and_then(|l| l.first().copied()))
                .ok_or_else(|| Error::Config("no step given (h)".into()))?,
            x_max: self.x_max.ok_or_else(|| Error::Config("no end point given (x_max)".into()))?,
            max_steps: self.max_steps.unwrap_or(DEFAULT_MAX_STEPS),
            continue_through_fold: self.through_fold.unwrap_or(false),
            x_min: self.x_min,
            rk_tol: self.rk_tol.unwrap_or(DEFAULT_RK_TOL),
        };
        spec.validate()?;
        Ok(spec)
    }
}
