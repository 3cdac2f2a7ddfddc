//! Asymptotic variance of the first-order reconstruction error for a
//! constant signal in white noise, rank-1 reconstruction.
//!
//! With `L ~ beta N` and the point index `l ~ gamma N / 2`, the variance is
//! `sigma^2 / N * D(beta, gamma)` with three branches on the canonical region
//! `beta <= 1/2`, `gamma <= 1`; other values are mapped in by the symmetries
//! `beta <-> 1 - beta` (L <-> K) and `gamma <-> 2 - gamma` (time reversal).

use crate::error::{Result, SsaError};

/// Branch for `gamma <= 2 min(beta, 1 - 2 beta)`.
pub fn d1(beta: f64, gamma: f64) -> f64 {
    let b = beta;
    (gamma * gamma * (1.0 + b) - 2.0 * gamma * (1.0 + b).powi(2) + 4.0 * b * (3.0 - 3.0 * b + 2.0 * b * b))
        / (12.0 * b * b * (1.0 - b).powi(2))
}

/// Branch for `2 min(beta, 1 - 2 beta) < gamma < 2 beta`.
pub fn d2(beta: f64, gamma: f64) -> f64 {
    let b = beta;
    let g = gamma;
    let poly = g.powi(4)
        + 2.0 * g.powi(3) * (3.0 * b - 2.0 - 3.0 * b * b)
        + 2.0 * g * g * (3.0 - 9.0 * b + 12.0 * b * b - 4.0 * b.powi(3))
        + 4.0 * g * (-1.0 + 4.0 * b - 3.0 * b * b - 4.0 * b.powi(3) + 4.0 * b.powi(4))
        + (8.0 * b - 56.0 * b * b + 144.0 * b.powi(3) - 160.0 * b.powi(4) + 64.0 * b.powi(5));
    poly / (6.0 * b * b * (1.0 - b).powi(2) * g * g)
}

/// Branch for `gamma >= 2 beta`.
pub fn d3(beta: f64, _gamma: f64) -> f64 {
    2.0 / (3.0 * beta)
}

/// `D(beta, gamma)` after mapping into the canonical region.
pub fn variance_factor(beta: f64, gamma: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) || !(0.0..=2.0).contains(&gamma) {
        return Err(SsaError::OutOfDomain(format!(
            "need 0 < beta < 1 and 0 <= gamma <= 2, got beta={beta}, gamma={gamma}"
        )));
    }
    let b = if beta > 0.5 { 1.0 - beta } else { beta };
    let g = if gamma > 1.0 { 2.0 - gamma } else { gamma };
    let first = 2.0 * b.min(1.0 - 2.0 * b);
    Ok(if g <= first {
        d1(b, g)
    } else if g < 2.0 * b {
        d2(b, g)
    } else {
        d3(b, g)
    })
}

/// `sigma^2 / N * D(beta, gamma)`.
pub fn asymptotic_variance(beta: f64, gamma: f64, sigma: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(SsaError::OutOfDomain("N must be positive".into()));
    }
    Ok(sigma * sigma / n as f64 * variance_factor(beta, gamma)?)
}
