//! Parameter estimation: GBM maximum likelihood, the EKF likelihood of the
//! liquidity model and its numerical maximisation, and pricing-error metrics.

pub mod ekf;
pub mod evaluate;
pub mod gbm;
pub mod mle;
pub mod optimize;

use serde::{Deserialize, Serialize};

use crate::error::CalibrationError;

pub use ekf::{
    ekf_filter_loglik, FilterOutput, FilteredState, InitialState, JacobianMode, Measurement,
    ProcessNoise, SsmConfig, StateSpaceModel,
};
pub use gbm::{gbm_loglik, gbm_mle, GbmFit};
pub use mle::{
    calibrate_liquidity, CalibrationResult, LiquidityCalibration, ParamBounds, THETA_NAMES,
};
pub use optimize::{hessian_std_errors, maximize_loglik, OptimizeOptions, OptimizeResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Moneyness {
    /// `S/K < 0.97`
    Itm,
    /// `0.97 <= S/K <= 1.03`
    Atm,
    /// `S/K > 1.03`
    Otm,
}

impl Moneyness {
    pub const ALL: [Moneyness; 3] = [Moneyness::Otm, Moneyness::Atm, Moneyness::Itm];

    pub fn label(self) -> &'static str {
        match self {
            Moneyness::Itm => "ITM",
            Moneyness::Atm => "ATM",
            Moneyness::Otm => "OTM",
        }
    }
}

/// Moneyness of a put with underlying `s` and strike `k`.
pub fn bucket_moneyness(s: f64, k: f64) -> Result<Moneyness, CalibrationError> {
    if !(s > 0.0 && k > 0.0) || !s.is_finite() || !k.is_finite() {
        return Err(CalibrationError::NonPositiveInput { s, k });
    }
    let m = s / k;
    Ok(if m > 1.03 {
        Moneyness::Otm
    } else if m < 0.97 {
        Moneyness::Itm
    } else {
        Moneyness::Atm
    })
}

pub fn rmse(theoretical: &[f64], actual: &[f64]) -> Result<f64, CalibrationError> {
    if theoretical.len() != actual.len() {
        return Err(CalibrationError::LengthMismatch(
            theoretical.len(),
            actual.len(),
        ));
    }
    if theoretical.is_empty() {
        return Err(CalibrationError::EmptyInput);
    }
    let ss: f64 = theoretical
        .iter()
        .zip(actual)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok((ss / theoretical.len() as f64).sqrt())
}
