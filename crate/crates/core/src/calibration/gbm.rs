//! Maximum likelihood for geometric Brownian motion on a price series.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::CalibrationError;

fn log_returns(prices: &[f64]) -> Result<Vec<f64>, CalibrationError> {
    if let Some((index, &value)) = prices.iter().enumerate().find(|(_, &p)| !(p > 0.0)) {
        return Err(CalibrationError::NonPositivePrice { index, value });
    }
    Ok(prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect())
}

/// `-1/2 sum [ln(2 pi sigma^2 dt) + (ln S_t - ln S_{t-1} - mu dt)^2 / (sigma^2 dt)]`.
pub fn gbm_loglik(prices: &[f64], dt: f64, mu: f64, sigma: f64) -> Result<f64, CalibrationError> {
    if !(sigma > 0.0) {
        return Err(CalibrationError::NonPositiveSigma(sigma));
    }
    if prices.len() < 2 {
        return Err(CalibrationError::TooFewObservations {
            needed: 2,
            got: prices.len(),
        });
    }
    let var = sigma * sigma * dt;
    let norm = (2.0 * PI * var).ln();
    Ok(log_returns(prices)?
        .iter()
        .map(|x| {
            let e = x - mu * dt;
            -0.5 * (norm + e * e / var)
        })
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbmFit {
    /// Mean log-return per year; no `sigma^2 / 2` correction.
    pub mu: f64,
    pub sigma: f64,
    pub n_returns: usize,
    /// Set when all returns are equal, so `sigma = 0` and the likelihood is unbounded.
    pub degenerate: bool,
    /// Log-likelihood at the estimate; `None` when degenerate.
    pub loglik: Option<f64>,
    /// Asymptotic standard errors `sigma / sqrt(n dt)` and `sigma / sqrt(2 n)`.
    pub stderr_mu: f64,
    pub stderr_sigma: f64,
}

/// Closed-form maximiser of [`gbm_loglik`].
pub fn gbm_mle(prices: &[f64], dt: f64) -> Result<GbmFit, CalibrationError> {
    if prices.len() < 2 {
        return Err(CalibrationError::TooFewObservations {
            needed: 2,
            got: prices.len(),
        });
    }
    let x = log_returns(prices)?;
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let ss = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sigma = (ss / dt).sqrt();
    let mu = mean / dt;
    let degenerate = !(sigma > 0.0);
    let loglik = if degenerate {
        None
    } else {
        Some(gbm_loglik(prices, dt, mu, sigma)?)
    };
    Ok(GbmFit {
        mu,
        sigma,
        n_returns: x.len(),
        degenerate,
        loglik,
        stderr_mu: sigma / (n * dt).sqrt(),
        stderr_sigma: sigma / (2.0 * n).sqrt(),
    })
}
