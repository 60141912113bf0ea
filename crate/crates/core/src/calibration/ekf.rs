//! Extended Kalman filter on the state `X = (S, L)` and its Gaussian
//! log-likelihood.
//!
//! Transition (Euler step of length `dt`):
//!
//! ```text
//! S' = S + mu S dt
//! L' = L + alpha (theta(L) - L) dt
//! ```
//!
//! plus noise with covariance `Q` built from the diffusion terms and the
//! three correlations. Only the price is observed, either as `ln S` or `S`.

use std::f64::consts::PI;

use nalgebra::{Matrix2, RowVector2, SymmetricEigen, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::CalibrationError;
use crate::model::ModelParams;

/// Innovation variances are floored here so that a noiseless model gives a
/// finite likelihood instead of an error.
pub const INNOVATION_VAR_FLOOR: f64 = 1e-20;

/// Smallest `|L|` used in the derivative of `|L|^zeta`.
const L_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measurement {
    /// `y = ln S + eps`
    #[default]
    LogPrice,
    /// `y = S + eps`
    Price,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianMode {
    #[default]
    Analytic,
    FiniteDifference,
}

/// How the state-dependent process noise is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessNoise {
    /// `Q` at the filtered mean.
    AtMean,
    /// `Q` at the filtered mean plus `S^2 dt beta^2 P_LL`, which makes the
    /// price variance the expectation of `S^2 dt sigma^2(L)` over the filtered
    /// distribution of `L`. Without it the likelihood cannot see how uncertain
    /// `L` is, and large `sigma_L` costs nothing.
    #[default]
    Expected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialState {
    pub s: f64,
    pub l: f64,
    /// Row-major 2x2 covariance.
    pub cov: [f64; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsmConfig {
    /// Observation spacing in years.
    pub dt: f64,
    pub measurement: Measurement,
    pub jacobian: JacobianMode,
    #[serde(default)]
    pub process_noise: ProcessNoise,
    /// Defaults to `S = first observation`, `L = theta_bar`,
    /// `P = diag(1e-4 S^2, sigma_L^2 / (2 alpha))`.
    pub initial: Option<InitialState>,
}

impl Default for SsmConfig {
    fn default() -> Self {
        Self {
            dt: 1.0 / 252.0,
            measurement: Measurement::LogPrice,
            jacobian: JacobianMode::Analytic,
            process_noise: ProcessNoise::Expected,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateSpaceModel {
    pub params: ModelParams,
    /// Measurement noise variance `R`.
    pub meas_var: f64,
    pub config: SsmConfig,
}

impl StateSpaceModel {
    pub fn new(params: ModelParams, meas_var: f64, config: SsmConfig) -> Self {
        Self {
            params,
            meas_var,
            config,
        }
    }

    pub fn transition(&self, x: Vector2<f64>) -> Vector2<f64> {
        let p = &self.params;
        let dt = self.config.dt;
        Vector2::new(
            x[0] + p.mu * x[0] * dt,
            x[1] + p.alpha * (p.theta_effective_abs(x[1]) - x[1]) * dt,
        )
    }

    pub fn transition_jacobian(&self, x: Vector2<f64>) -> Matrix2<f64> {
        match self.config.jacobian {
            JacobianMode::Analytic => {
                let p = &self.params;
                let dt = self.config.dt;
                let m = x[1].abs().max(L_FLOOR);
                let dtheta =
                    p.kappa_theta() * p.lambda * p.zeta * m.powf(p.zeta - 1.0) * x[1].signum();
                Matrix2::new(
                    1.0 + p.mu * dt,
                    0.0,
                    0.0,
                    1.0 + p.alpha * (dtheta - 1.0) * dt,
                )
            }
            JacobianMode::FiniteDifference => {
                let mut jac = Matrix2::zeros();
                for k in 0..2 {
                    let h = 1e-6 * x[k].abs().max(1.0);
                    let mut up = x;
                    let mut down = x;
                    up[k] += h;
                    down[k] -= h;
                    let col = (self.transition(up) - self.transition(down)) / (2.0 * h);
                    jac.set_column(k, &col);
                }
                jac
            }
        }
    }

    /// Covariance of the Euler noise over one step started at `x`.
    pub fn process_noise_cov(&self, x: Vector2<f64>) -> Matrix2<f64> {
        let p = &self.params;
        let dt = self.config.dt;
        let (s, l) = (x[0], x[1]);
        let q11 = s * s * dt * p.local_variance(l);
        let q22 = p.sigma_l * p.sigma_l * dt;
        let q12 = s * dt * p.sigma_l * (p.beta * l * p.rho3 + p.sigma_s * p.rho2);
        Matrix2::new(q11, q12, q12, q22)
    }

    /// `(h(x), dh/dx)`.
    pub fn measure(&self, x: Vector2<f64>) -> (f64, RowVector2<f64>) {
        match self.config.measurement {
            Measurement::LogPrice => (x[0].ln(), RowVector2::new(1.0 / x[0], 0.0)),
            Measurement::Price => (x[0], RowVector2::new(1.0, 0.0)),
        }
    }

    fn observation(&self, price: f64, index: usize) -> Result<f64, CalibrationError> {
        match self.config.measurement {
            Measurement::LogPrice if price > 0.0 => Ok(price.ln()),
            Measurement::Price if price.is_finite() => Ok(price),
            _ => Err(CalibrationError::NonPositivePrice {
                index,
                value: price,
            }),
        }
    }

    fn initial_state(&self, first: f64) -> (Vector2<f64>, Matrix2<f64>) {
        if let Some(init) = self.config.initial {
            let c = init.cov;
            return (
                Vector2::new(init.s, init.l),
                Matrix2::new(c[0], c[1], c[2], c[3]),
            );
        }
        let p = &self.params;
        let l_var = if p.alpha > 1e-8 {
            p.sigma_l * p.sigma_l / (2.0 * p.alpha)
        } else {
            p.sigma_l * p.sigma_l
        };
        (
            Vector2::new(first, p.theta_bar),
            Matrix2::new(1e-4 * first * first, 0.0, 0.0, l_var),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilteredState {
    pub s: f64,
    pub l: f64,
    pub p_ss: f64,
    pub p_sl: f64,
    pub p_ll: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterOutput {
    /// Negative of `-1/2 sum [ln(2 pi) + ln V_t + e_t^2 / V_t]`.
    pub neg_loglik: f64,
    /// One entry per observation; the first is the initial state.
    pub states: Vec<FilteredState>,
    pub innovations: Vec<f64>,
    pub innovation_vars: Vec<f64>,
}

/// Symmetrises `p` and lifts negative eigenvalues to zero.
pub(crate) fn clamp_psd(p: Matrix2<f64>) -> Matrix2<f64> {
    let sym = (p + p.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    if eig.eigenvalues.min() >= 0.0 {
        return sym;
    }
    let d = Matrix2::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0)));
    eig.eigenvectors * d * eig.eigenvectors.transpose()
}

fn record(x: &Vector2<f64>, p: &Matrix2<f64>) -> FilteredState {
    FilteredState {
        s: x[0],
        l: x[1],
        p_ss: p[(0, 0)],
        p_sl: p[(0, 1)],
        p_ll: p[(1, 1)],
    }
}

/// Runs the filter over a price series. The first price initialises the
/// state; every later price contributes one likelihood term.
pub fn ekf_filter_loglik(
    prices: &[f64],
    model: &StateSpaceModel,
) -> Result<FilterOutput, CalibrationError> {
    let first = *prices.first().ok_or(CalibrationError::EmptyInput)?;
    model.observation(first, 0)?;
    let params = model.params.validate()?;
    let model = StateSpaceModel { params, ..*model };
    if !(model.meas_var >= 0.0) {
        return Err(CalibrationError::Model(
            crate::error::ModelError::InvalidParameter {
                name: "meas_var",
                value: model.meas_var,
                reason: "measurement variance must be non-negative",
            },
        ));
    }

    let (mut x, mut p) = model.initial_state(first);
    let mut out = FilterOutput {
        neg_loglik: 0.0,
        states: Vec::with_capacity(prices.len()),
        innovations: Vec::with_capacity(prices.len().saturating_sub(1)),
        innovation_vars: Vec::with_capacity(prices.len().saturating_sub(1)),
    };
    out.states.push(record(&x, &p));
    let log_2pi = (2.0 * PI).ln();
    let mut loglik = 0.0;

    for (t, &price) in prices.iter().enumerate().skip(1) {
        let y = model.observation(price, t)?;
        let f = model.transition_jacobian(x);
        let mut q = model.process_noise_cov(x);
        if model.config.process_noise == ProcessNoise::Expected {
            let b = model.params.beta;
            q[(0, 0)] += x[0] * x[0] * model.config.dt * b * b * p[(1, 1)];
        }
        let x_pred = model.transition(x);
        let p_pred = f * p * f.transpose() + q;
        if !x_pred.iter().all(|v| v.is_finite() && v.abs() <= 1e12)
            || (model.config.measurement == Measurement::LogPrice && x_pred[0] <= 0.0)
        {
            return Err(CalibrationError::DivergedFilter { step: t });
        }

        let (h, jac) = model.measure(x_pred);
        let e = y - h;
        let v_raw = (jac * p_pred * jac.transpose())[(0, 0)] + model.meas_var;
        if !v_raw.is_finite() || v_raw < 0.0 {
            return Err(CalibrationError::InnovationCovSingular { step: t });
        }
        let v = v_raw.max(INNOVATION_VAR_FLOOR);
        loglik += -0.5 * (log_2pi + v.ln() + e * e / v);

        let gain = p_pred * jac.transpose() / v;
        x = x_pred + gain * e;
        // Joseph form keeps the update symmetric and PSD up to rounding.
        let a = Matrix2::identity() - gain * jac;
        p = clamp_psd(a * p_pred * a.transpose() + gain * gain.transpose() * model.meas_var);
        if !x.iter().all(|v| v.is_finite() && v.abs() <= 1e12) {
            return Err(CalibrationError::DivergedFilter { step: t });
        }
        out.states.push(record(&x, &p));
        out.innovations.push(e);
        out.innovation_vars.push(v);
    }
    out.neg_loglik = -loglik;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_params() -> ModelParams {
        ModelParams {
            beta: 0.0,
            kappa: 0.0,
            mu: 0.05,
            ..ModelParams::default()
        }
    }

    #[test]
    fn jacobians_agree() {
        let p = ModelParams {
            kappa: 0.01,
            ..ModelParams::default()
        };
        let mut m = StateSpaceModel::new(p, 1e-4, SsmConfig::default());
        for x in [
            Vector2::new(3000.0, 0.2),
            Vector2::new(10.0, 1.7),
            Vector2::new(50.0, -0.4),
        ] {
            let a = m.transition_jacobian(x);
            m.config.jacobian = JacobianMode::FiniteDifference;
            let b = m.transition_jacobian(x);
            m.config.jacobian = JacobianMode::Analytic;
            assert!((a - b).abs().max() < 1e-7, "{a} {b}");
        }
    }

    #[test]
    fn process_noise_is_psd() {
        let m = StateSpaceModel::new(ModelParams::default(), 0.0, SsmConfig::default());
        for l in [-1.0, 0.0, 0.3, 2.0] {
            let q = m.process_noise_cov(Vector2::new(100.0, l));
            assert!(SymmetricEigen::new(q).eigenvalues.min() >= -1e-12);
        }
    }

    #[test]
    fn expected_noise_adds_liquidity_uncertainty() {
        let p = ModelParams::default();
        let prices = [100.0, 101.0, 99.5, 100.2];
        let run = |noise| {
            let cfg = SsmConfig {
                process_noise: noise,
                ..SsmConfig::default()
            };
            ekf_filter_loglik(&prices, &StateSpaceModel::new(p, 1e-6, cfg)).unwrap()
        };
        let (mean, expected) = (run(ProcessNoise::AtMean), run(ProcessNoise::Expected));
        // first step: same start, so the log-price variances differ by
        // S^2 dt beta^2 P_LL / S_pred^2
        let dt = 1.0 / 252.0;
        let p_ll = p.sigma_l * p.sigma_l / (2.0 * p.alpha);
        let extra = dt * p.beta * p.beta * p_ll / (1.0 + p.mu * dt).powi(2);
        assert!((expected.innovation_vars[0] - mean.innovation_vars[0] - extra).abs() < 1e-15);

        let linear = ModelParams { beta: 0.0, ..p };
        let a = ekf_filter_loglik(
            &prices,
            &StateSpaceModel::new(linear, 1e-6, SsmConfig::default()),
        )
        .unwrap();
        let cfg = SsmConfig {
            process_noise: ProcessNoise::AtMean,
            ..SsmConfig::default()
        };
        let b = ekf_filter_loglik(&prices, &StateSpaceModel::new(linear, 1e-6, cfg)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn clamp_removes_negative_direction() {
        let p = Matrix2::new(1.0, 2.0, 2.0, 1.0);
        let c = clamp_psd(p);
        assert!(SymmetricEigen::new(c).eigenvalues.min() >= -1e-15);
        assert!((c[(0, 0)] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn noiseless_model_has_zero_innovations() {
        let p = ModelParams {
            sigma_s: 1e-9,
            sigma_l: 0.0,
            ..linear_params()
        };
        let dt = 1.0 / 252.0;
        let prices: Vec<f64> = (0..50).map(|t| 100.0 * (1.0 + p.mu * dt).powi(t)).collect();
        let cfg = SsmConfig {
            dt,
            measurement: Measurement::Price,
            initial: Some(InitialState {
                s: 100.0,
                l: p.theta_bar,
                cov: [0.0; 4],
            }),
            ..SsmConfig::default()
        };
        let out = ekf_filter_loglik(&prices, &StateSpaceModel::new(p, 0.0, cfg)).unwrap();
        assert!(out.innovations.iter().all(|e| e.abs() < 1e-9));
        assert!(out.neg_loglik.is_finite());
    }

    #[test]
    fn empty_and_bad_input() {
        let m = StateSpaceModel::new(ModelParams::default(), 1e-4, SsmConfig::default());
        assert_eq!(
            ekf_filter_loglik(&[], &m),
            Err(CalibrationError::EmptyInput)
        );
        assert!(matches!(
            ekf_filter_loglik(&[100.0, -1.0], &m),
            Err(CalibrationError::NonPositivePrice { index: 1, .. })
        ));
    }
}
