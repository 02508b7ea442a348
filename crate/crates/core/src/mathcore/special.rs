use std::f64::consts::FRAC_1_SQRT_2;

use statrs::function::erf::erfc;

use crate::error::{domain, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density φ(z).
#[inline]
pub fn std_normal_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal distribution function Φ(z).
#[inline]
pub fn std_normal_cdf(z: f64) -> f64 {
    if z == f64::NEG_INFINITY {
        return 0.0;
    }
    if z == f64::INFINITY {
        return 1.0;
    }
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Density of N(mean, variance) at `x`.
pub fn gauss_pdf(x: f64, mean: f64, variance: f64) -> Result<f64> {
    if !(variance > 0.0) {
        return Err(domain(format!("variance must be positive, got {variance}")));
    }
    let sd = variance.sqrt();
    Ok(std_normal_pdf((x - mean) / sd) / sd)
}

/// Φ(x). Alias kept for symmetry with [`gauss_pdf`].
pub fn gauss_cdf(x: f64) -> f64 {
    std_normal_cdf(x)
}

/// Skew-normal density `(2/σ)·φ((x−u)/σ)·Φ(α(x−u)/σ)`.
pub fn skew_normal_pdf(x: f64, location: f64, scale: f64, shape: f64) -> Result<f64> {
    if !(scale > 0.0) {
        return Err(domain(format!("skew-normal scale must be positive, got {scale}")));
    }
    Ok(skew_normal_unchecked(x, location, scale, shape))
}

#[inline]
pub(crate) fn skew_normal_unchecked(x: f64, location: f64, scale: f64, shape: f64) -> f64 {
    let z = (x - location) / scale;
    let tail = std_normal_cdf(shape * z);
    if tail == 0.0 {
        return 0.0;
    }
    2.0 / scale * std_normal_pdf(z) * tail
}

/// `√(2/π)`, the mean of a half-normal variable with unit scale.
pub const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;
