//! Adaptive Gauss–Kronrod (7, 15) quadrature.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: usize = 40;

fn gk15<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = r * XGK[j];
        let s = f(c - dx)? + f(c + dx)?;
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Ok((kron * r, ((kron - gauss) * r).abs()))
}

fn recurse<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64, tol: f64, depth: usize) -> Result<(f64, f64)> {
    let (v, e) = gk15(f, a, b)?;
    if e <= tol || depth >= MAX_DEPTH || (b - a).abs() <= 1e-15 * a.abs().max(b.abs()) {
        return Ok((v, e));
    }
    let m = 0.5 * (a + b);
    let (v1, e1) = recurse(f, a, m, 0.5 * tol, depth + 1)?;
    let (v2, e2) = recurse(f, m, b, 0.5 * tol, depth + 1)?;
    Ok((v1 + v2, e1 + e2))
}

/// `∫_a^b f` to absolute tolerance `tol`; returns the value and error estimate.
/// Errors raised by `f` are propagated.
pub fn integrate<F: FnMut(f64) -> Result<f64>>(mut f: F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    if !(tol > 0.0) {
        return Err(Error::Config("quadrature tolerance must be positive".into()));
    }
    let (v, e) = recurse(&mut f, a, b, tol, 0)?;
    if !v.is_finite() {
        return Err(Error::OracleUnavailable("quadrature produced a non-finite value".into()));
    }
    Ok((v, e))
}
