//! Normal and F distribution functions used for calibration.
//!
//! Critical values follow the upper-tail convention: `z(α)` is the point with
//! `P(Z >= z(α)) = α`.

use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal distribution function `Φ(x)`.
pub fn normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Upper `α` point of the standard normal, `z(α) = Φ⁻¹(1 - α)`.
pub fn normal_upper_quantile(alpha: f64) -> Result<f64> {
    check_level(alpha)?;
    Ok(-inverse_normal_cdf(alpha))
}

/// Upper `α` point of the `F(d1, d2)` distribution.
///
/// Solved through the regularised incomplete beta function: if
/// `B ~ Beta(d1/2, d2/2)` then `F = (d2/d1) B / (1 - B)`.
pub fn f_upper_quantile(alpha: f64, d1: f64, d2: f64) -> Result<f64> {
    check_level(alpha)?;
    if !(d1 >= 1.0 && d2 >= 1.0) {
        return Err(Error::Argument(format!(
            "F degrees of freedom must be >= 1, got ({d1}, {d2})"
        )));
    }
    let b = inverse_beta_reg(0.5 * d1, 0.5 * d2, 1.0 - alpha)?;
    Ok(d2 / d1 * b / (1.0 - b))
}

/// Solves `I_x(a, b) = target` for `x` in `(0, 1)`.
///
/// Newton steps on the regularised incomplete beta with a bisection bracket as
/// fallback; the bracket is kept so the result is accurate to about 1e-15 in `x`.
pub fn inverse_beta_reg(a: f64, b: f64, target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) || !(a > 0.0 && b > 0.0) {
        return Err(Error::Argument(format!(
            "inverse incomplete beta needs a, b > 0 and target in (0, 1); got a={a}, b={b}, target={target}"
        )));
    }
    let ln_beta = statrs::function::gamma::ln_gamma(a) + statrs::function::gamma::ln_gamma(b)
        - statrs::function::gamma::ln_gamma(a + b);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut x = a / (a + b);
    for _ in 0..200 {
        let g = beta_reg(a, b, x) - target;
        if g == 0.0 {
            return Ok(x);
        }
        if g < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 1e-15 * hi.max(1e-300) {
            break;
        }
        let log_density = (a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_beta;
        let step = g / log_density.exp();
        if step.is_finite() && step.abs() <= 1e-16 * x {
            break;
        }
        let candidate = x - step;
        x = if step.is_finite() && candidate > lo && candidate < hi {
            candidate
        } else {
            0.5 * (lo + hi)
        };
    }
    if x.is_finite() && x > 0.0 && x < 1.0 {
        Ok(x)
    } else {
        Err(Error::Numeric(format!(
            "inverse incomplete beta failed for a={a}, b={b}"
        )))
    }
}

fn check_level(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Argument(format!("level {alpha} outside (0, 1)")))
    }
}

/// `Φ⁻¹(p)`, Wichura's algorithm AS 241 (PPND16), relative accuracy about 1e-16.
fn inverse_normal_cdf(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

fn poly(coef: &[f64; 8], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

const A: [f64; 8] = [
    3.387_132_872_796_366_5,
    133.141_667_891_784_38,
    1_971.590_950_306_551_3,
    13_731.693_765_509_461,
    45_921.953_931_549_87,
    67_265.770_927_008_7,
    33_430.575_583_588_13,
    2_509.080_928_730_122_7,
];
const B: [f64; 8] = [
    1.0,
    42.313_330_701_600_91,
    687.187_007_492_057_9,
    5_394.196_021_424_751,
    21_213.794_301_586_597,
    39_307.895_800_092_71,
    28_729.085_735_721_943,
    5_226.495_278_852_545,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_5,
    4.630_337_846_156_546,
    5.769_497_221_460_691,
    3.647_848_324_763_204_5,
    1.270_458_252_452_368_4,
    0.241_780_725_177_450_6,
    0.022_723_844_989_269_184,
    7.745_450_142_783_414e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_759,
    1.676_384_830_183_803_8,
    0.689_767_334_985_1,
    0.148_103_976_427_480_08,
    0.015_198_666_563_616_457,
    5.475_938_084_995_345e-4,
    1.050_750_071_644_416_9e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103,
    5.463_784_911_164_114,
    1.784_826_539_917_291_3,
    0.296_560_571_828_504_9,
    0.026_532_189_526_576_124,
    0.001_242_660_947_388_078_4,
    2.711_555_568_743_487_6e-5,
    2.010_334_399_292_288_1e-7,
];
const F: [f64; 8] = [
    1.0,
    0.599_832_206_555_888,
    0.136_929_880_922_735_8,
    0.014_875_361_290_850_615,
    7.868_691_311_456_133e-4,
    1.846_318_317_510_054_8e-5,
    1.421_511_758_316_446e-7,
    2.044_263_103_389_939_7e-15,
];
