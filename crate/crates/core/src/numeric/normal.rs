use std::f64::consts::{PI, SQRT_2};

use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard Gaussian CDF via the complementary error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Inverse of [`normal_cdf`] on `(0, 1)`, with one Newton correction.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Range(format!("p = {p} outside (0, 1)")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let x0 = -SQRT_2 * erfc_inv(2.0 * p);
    let density = normal_pdf(x0);
    if density == 0.0 {
        return Ok(x0);
    }
    Ok(x0 - (normal_cdf(x0) - p) / density)
}
