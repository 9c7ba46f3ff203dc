//! Approximate l0 sparsity penalty.
//!
//! Inside the band `|x| <= 1/alpha` each entry is pulled toward zero with
//! gradient `alpha * sgn(x) - alpha^2 * x`; outside the band it contributes
//! nothing. `sgn(0)` is taken as zero, so the origin is stationary.

use nalgebra::DVector;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyParams {
    alpha: f64,
}

impl PenaltyParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid(format!(
                "alpha must be positive and finite, got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Half-width of the attraction band.
    pub fn band(&self) -> f64 {
        1.0 / self.alpha
    }
}

fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[inline]
pub(crate) fn gradient_entry(v: f64, alpha: f64) -> f64 {
    if v.abs() <= 1.0 / alpha {
        alpha * sgn(v) - alpha * alpha * v
    } else {
        0.0
    }
}

fn ensure_finite(x: &DVector<f64>) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(invalid(format!("entry {i} is not finite"))),
        None => Ok(()),
    }
}

/// Entrywise gradient of the approximate l0 penalty.
pub fn penalty_gradient(x: &DVector<f64>, params: PenaltyParams) -> Result<DVector<f64>> {
    ensure_finite(x)?;
    Ok(x.map(|v| gradient_entry(v, params.alpha)))
}

/// The penalty itself, reconstructed as the entrywise antiderivative of
/// [`penalty_gradient`]: `alpha|x| - alpha^2 x^2 / 2` inside the band and
/// `1/2` outside. Only used for diagnostics; the solver monitors the l1 norm.
pub fn penalty_value(x: &DVector<f64>, params: PenaltyParams) -> Result<f64> {
    ensure_finite(x)?;
    let a = params.alpha;
    Ok(x.iter()
        .map(|&v| {
            let m = v.abs();
            if m <= 1.0 / a {
                a * m - 0.5 * a * a * m * m
            } else {
                0.5
            }
        })
        .sum())
}

pub fn l1_norm(x: &DVector<f64>) -> Result<f64> {
    ensure_finite(x)?;
    Ok(x.lp_norm(1))
}
