//! Scalar helpers on top of `libm`, shared by every module.

pub use core::f64::consts::PI;

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn powi(x: f64, k: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..k {
        acc *= x;
    }
    acc
}

#[inline]
pub fn lgamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `ln Σ exp(vᵢ)` with the maximum factored out. Empty input gives `-∞`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.iter().map(|&v| exp(v - max)).sum();
    max + ln(sum)
}

/// `|a - b| / max(|b|, floor)`.
#[inline]
pub fn rel_diff(a: f64, b: f64, floor: f64) -> f64 {
    abs(a - b) / abs(b).max(floor)
}
