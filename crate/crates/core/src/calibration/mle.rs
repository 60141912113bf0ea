//! Maximum likelihood for the liquidity model through the EKF likelihood.

use serde::{Deserialize, Serialize};

use super::ekf::{ekf_filter_loglik, FilteredState, SsmConfig, StateSpaceModel};
use super::gbm::gbm_mle;
use super::optimize::{hessian_std_errors, maximize_loglik, OptimizeOptions, INVALID_OBJECTIVE};
use crate::error::CalibrationError;
use crate::model::ModelParams;

/// Order of the estimated parameter vector.
pub const THETA_NAMES: [&str; 11] = [
    "mu",
    "alpha",
    "beta",
    "theta_bar",
    "sigma_s",
    "sigma_l",
    "rho1",
    "rho2",
    "rho3",
    "lambda",
    "zeta",
];

/// Optimiser coordinates: the eleven model parameters followed by `ln R`.
const N_COORDS: usize = 12;

pub fn theta_of(p: &ModelParams) -> [f64; 11] {
    [
        p.mu,
        p.alpha,
        p.beta,
        p.theta_bar,
        p.sigma_s,
        p.sigma_l,
        p.rho1,
        p.rho2,
        p.rho3,
        p.lambda,
        p.zeta,
    ]
}

/// Copies `base` with the eleven estimated parameters replaced.
pub fn with_theta(base: &ModelParams, theta: &[f64]) -> ModelParams {
    let mut p = *base;
    for (name, &v) in THETA_NAMES.iter().zip(theta) {
        // every name in THETA_NAMES is a valid key
        p.set(name, v).expect("theta key");
    }
    p
}

/// Box constraints on `(theta, ln R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamBounds {
    pub lower: [f64; N_COORDS],
    pub upper: [f64; N_COORDS],
}

impl Default for ParamBounds {
    fn default() -> Self {
        Self {
            lower: [
                -1.0,
                0.01,
                0.0,
                0.0,
                1e-4,
                1e-4,
                -0.99,
                -0.99,
                -0.99,
                0.0,
                0.05,
                1e-12f64.ln(),
            ],
            upper: [
                1.0, 20.0, 5.0, 3.0, 2.0, 3.0, 0.99, 0.99, 0.99, 20.0, 1.0, 0.0,
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiquidityCalibration {
    pub ssm: SsmConfig,
    /// Starting point; fields outside `THETA_NAMES` are carried through unchanged.
    pub init: ModelParams,
    pub init_meas_var: f64,
    pub bounds: ParamBounds,
    /// `true` pins the coordinate at its initial value. Defaults pin `lambda` and `zeta`.
    pub fixed: [bool; N_COORDS],
    pub optimizer: OptimizeOptions,
    pub std_errors: bool,
}

impl LiquidityCalibration {
    /// Starting point derived from the series: the GBM drift, and `sigma_s`
    /// chosen so the local variance at `theta_bar` matches the GBM variance.
    pub fn from_prices(
        prices: &[f64],
        ssm: SsmConfig,
        base: ModelParams,
    ) -> Result<Self, CalibrationError> {
        let gbm = gbm_mle(prices, ssm.dt)?;
        let bounds = ParamBounds::default();
        let mut init = ModelParams {
            mu: gbm.mu.clamp(bounds.lower[0], bounds.upper[0]),
            alpha: 2.0,
            beta: 0.5,
            theta_bar: 0.2,
            sigma_l: 0.2,
            rho1: 0.2,
            rho2: 0.3,
            rho3: 0.2,
            lambda: 5.0,
            zeta: 0.5,
            ..base
        };
        let b = init.rho1 * init.beta * init.theta_bar;
        let disc = b * b - (init.beta * init.theta_bar).powi(2) + gbm.sigma * gbm.sigma;
        let sigma_s = -b + disc.max(0.0).sqrt();
        init.sigma_s = if sigma_s > 1e-3 {
            sigma_s
        } else {
            0.5 * gbm.sigma.max(2e-3)
        };
        init.sigma_s = init.sigma_s.clamp(bounds.lower[4], bounds.upper[4]);
        let mut fixed = [false; N_COORDS];
        fixed[9] = true;
        fixed[10] = true;
        Ok(Self {
            ssm,
            init,
            init_meas_var: 1e-6,
            bounds,
            fixed,
            optimizer: OptimizeOptions {
                max_evals: 4000,
                ..OptimizeOptions::default()
            },
            std_errors: true,
        })
    }

    fn model_at(&self, x: &[f64]) -> StateSpaceModel {
        StateSpaceModel::new(with_theta(&self.init, &x[..11]), x[11].exp(), self.ssm)
    }

    fn objective(&self, prices: &[f64], x: &[f64]) -> f64 {
        match ekf_filter_loglik(prices, &self.model_at(x)) {
            Ok(out) if out.neg_loglik.is_finite() => out.neg_loglik,
            _ => INVALID_OBJECTIVE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub params: ModelParams,
    /// Estimates in [`THETA_NAMES`] order.
    pub theta_hat: Vec<f64>,
    pub meas_var: f64,
    pub neg_loglik: f64,
    /// Standard errors of `(theta, ln R)`; `None` for pinned coordinates or
    /// when the Hessian is not positive definite.
    pub std_errors: Option<Vec<Option<f64>>>,
    pub filtered_states: Vec<FilteredState>,
    pub converged: bool,
    pub evaluations: usize,
}

impl CalibrationResult {
    /// `estimate / stderr` for each entry of [`THETA_NAMES`].
    pub fn t_stats(&self) -> Vec<Option<f64>> {
        let Some(se) = &self.std_errors else {
            return vec![None; self.theta_hat.len()];
        };
        self.theta_hat
            .iter()
            .zip(se)
            .map(|(v, s)| s.filter(|s| *s > 0.0).map(|s| v / s))
            .collect()
    }
}

/// Fits the liquidity model to a price series by maximising the EKF likelihood.
pub fn calibrate_liquidity(
    prices: &[f64],
    cfg: &LiquidityCalibration,
) -> Result<CalibrationResult, CalibrationError> {
    if prices.len() < 3 {
        return Err(CalibrationError::TooFewObservations {
            needed: 3,
            got: prices.len(),
        });
    }
    let mut init = theta_of(&cfg.init).to_vec();
    init.push(cfg.init_meas_var.ln());
    let opt = maximize_loglik(
        |x| cfg.objective(prices, x),
        &init,
        &cfg.bounds.lower,
        &cfg.bounds.upper,
        &cfg.fixed,
        &cfg.optimizer,
    )?;
    let model = cfg.model_at(&opt.x);
    let out = ekf_filter_loglik(prices, &model)?;
    let params = model.params.validate()?;
    let std_errors = cfg.std_errors.then(|| {
        let free: Vec<usize> = (0..N_COORDS).filter(|&i| !cfg.fixed[i]).collect();
        hessian_std_errors(|x| cfg.objective(prices, x), &opt.x, &free)
    });
    Ok(CalibrationResult {
        params,
        theta_hat: opt.x[..11].to_vec(),
        meas_var: model.meas_var,
        neg_loglik: out.neg_loglik,
        std_errors,
        filtered_states: out.states,
        converged: opt.converged,
        evaluations: opt.evals,
    })
}
