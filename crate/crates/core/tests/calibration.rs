mod common;

use common::LinearKalman;
use liqopt_core::calibration::{
    calibrate_liquidity, ekf_filter_loglik, gbm_loglik, gbm_mle, maximize_loglik,
    LiquidityCalibration, Measurement, OptimizeOptions, SsmConfig, StateSpaceModel,
};
use liqopt_core::mc::{Measure, SimConfig};
use liqopt_core::{simulate_paths, CalibrationError, ModelParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const DT: f64 = 1.0 / 252.0;

fn simulated_closes(p: &ModelParams, s0: f64, n: usize, seed: u64) -> Vec<f64> {
    let cfg = SimConfig {
        n_paths: 1,
        n_steps: n - 1,
        seed,
        measure: Measure::Physical,
        antithetic: false,
        keep_paths: true,
        ..SimConfig::default()
    };
    let batch = simulate_paths(p, s0, p.theta_bar, DT * (n - 1) as f64, &cfg).unwrap();
    batch.s_paths.unwrap().remove(0)
}

fn gbm_closes(mu: f64, sigma: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = Normal::new(mu * DT, sigma * DT.sqrt()).unwrap();
    let mut s = vec![100.0];
    for _ in 1..n {
        let last = *s.last().unwrap();
        s.push(last * z.sample(&mut rng).exp());
    }
    s
}

fn linear_params(rho2: f64) -> ModelParams {
    ModelParams {
        mu: 0.05,
        beta: 0.0,
        kappa: 0.0,
        rho2,
        ..ModelParams::default()
    }
}

fn oracle_nll(p: &ModelParams, r: f64, y: &[f64]) -> f64 {
    let kf = LinearKalman {
        f: [[1.0 + p.mu * DT, 0.0], [0.0, 1.0 - p.alpha * DT]],
        c: [0.0, p.alpha * p.theta_bar * DT],
        q: |x: [f64; 2]| {
            let q12 = x[0] * DT * p.sigma_l * p.sigma_s * p.rho2;
            [
                [x[0] * x[0] * DT * p.sigma_s * p.sigma_s, q12],
                [q12, p.sigma_l * p.sigma_l * DT],
            ]
        },
        r,
    };
    let p0 = [
        [1e-4 * y[0] * y[0], 0.0],
        [0.0, p.sigma_l * p.sigma_l / (2.0 * p.alpha)],
    ];
    kf.neg_loglik(y, [y[0], p.theta_bar], p0)
}

#[test]
fn ekf_reduces_to_linear_kalman_filter() {
    let ssm = SsmConfig {
        measurement: Measurement::Price,
        ..SsmConfig::default()
    };
    for (seed, rho2, r) in [
        (1, 0.5, 1e-4),
        (2, 0.0, 1e-2),
        (3, -0.3, 0.0),
        (4, 0.7, 0.3),
    ] {
        let p = linear_params(rho2);
        let y = simulated_closes(&p, 10.0, 400, seed);
        let ekf = ekf_filter_loglik(&y, &StateSpaceModel::new(p, r, ssm)).unwrap();
        let kf = oracle_nll(&p, r, &y);
        assert!(
            (ekf.neg_loglik - kf).abs() < 1e-8,
            "seed {seed}: {} vs {kf}",
            ekf.neg_loglik
        );
    }
}

#[test]
fn log_measurement_differs_from_price_measurement() {
    let p = linear_params(0.5);
    let y = simulated_closes(&p, 10.0, 200, 9);
    let price = ekf_filter_loglik(
        &y,
        &StateSpaceModel::new(
            p,
            1e-4,
            SsmConfig {
                measurement: Measurement::Price,
                ..SsmConfig::default()
            },
        ),
    )
    .unwrap();
    let log = ekf_filter_loglik(&y, &StateSpaceModel::new(p, 1e-6, SsmConfig::default())).unwrap();
    assert_eq!(price.states.len(), y.len());
    assert_eq!(log.innovations.len(), y.len() - 1);
    assert!(price.neg_loglik.is_finite() && log.neg_loglik.is_finite());
    assert!((price.neg_loglik - log.neg_loglik).abs() > 1.0);
}

#[test]
fn filter_rejects_non_positive_prices() {
    let p = ModelParams::default();
    let m = StateSpaceModel::new(p, 1e-6, SsmConfig::default());
    let err = ekf_filter_loglik(&[10.0, 0.0, 11.0], &m).unwrap_err();
    assert_eq!(
        err,
        CalibrationError::NonPositivePrice {
            index: 1,
            value: 0.0
        }
    );
    assert_eq!(
        ekf_filter_loglik(&[], &m).unwrap_err(),
        CalibrationError::EmptyInput
    );
}

#[test]
fn gbm_mle_recovers_parameters() {
    for seed in 0..20 {
        let (mu, sigma) = (0.08, 0.25);
        let y = gbm_closes(mu, sigma, 2000, seed);
        let fit = gbm_mle(&y, DT).unwrap();
        assert!(
            (fit.mu - mu).abs() < 3.0 * fit.stderr_mu,
            "seed {seed}: mu {}",
            fit.mu
        );
        assert!(
            (fit.sigma - sigma).abs() < 3.0 * fit.stderr_sigma,
            "seed {seed}: sigma {}",
            fit.sigma
        );
    }
}

#[test]
fn nelder_mead_matches_closed_form_gbm() {
    let y = gbm_closes(0.03, 0.2, 500, 42);
    let fit = gbm_mle(&y, DT).unwrap();
    let res = maximize_loglik(
        |x| -gbm_loglik(&y, DT, x[0], x[1]).unwrap_or(f64::NAN),
        &[0.0, 0.5],
        &[-2.0, 1e-3],
        &[2.0, 2.0],
        &[false, false],
        &OptimizeOptions::default(),
    )
    .unwrap();
    assert!(res.converged);
    assert!(
        (res.x[0] - fit.mu).abs() < 1e-3,
        "{} vs {}",
        res.x[0],
        fit.mu
    );
    assert!(
        (res.x[1] - fit.sigma).abs() < 1e-5,
        "{} vs {}",
        res.x[1],
        fit.sigma
    );
    assert!((res.value + fit.loglik.unwrap()).abs() < 1e-6);
}

#[test]
fn liquidity_fit_is_at_least_as_likely_as_the_truth() {
    let truth = ModelParams {
        mu: 0.0,
        alpha: 2.0,
        beta: 0.8,
        theta_bar: 0.17,
        sigma_s: 0.12,
        sigma_l: 0.12,
        rho1: 0.2,
        rho2: 0.5,
        rho3: 0.3,
        kappa: 5e-5,
        ..ModelParams::default()
    };
    let y = simulated_closes(&truth, 3000.0, 300, 7);
    let ssm = SsmConfig::default();
    let mut cfg = LiquidityCalibration::from_prices(&y, ssm, truth).unwrap();
    cfg.std_errors = false;
    let fit = calibrate_liquidity(&y, &cfg).unwrap();
    let at_truth = ekf_filter_loglik(&y, &StateSpaceModel::new(truth, 1e-8, ssm)).unwrap();
    assert!(
        fit.neg_loglik <= at_truth.neg_loglik + 1.0,
        "{} vs {}",
        fit.neg_loglik,
        at_truth.neg_loglik
    );
    assert_eq!(fit.theta_hat.len(), 11);
    assert_eq!(fit.filtered_states.len(), y.len());
    // lambda and zeta are pinned by default
    assert_eq!(fit.params.lambda, truth.lambda);
    assert_eq!(fit.params.zeta, truth.zeta);
    for (k, (&lo, &hi)) in cfg
        .bounds
        .lower
        .iter()
        .zip(&cfg.bounds.upper)
        .take(11)
        .enumerate()
    {
        assert!(fit.theta_hat[k] >= lo && fit.theta_hat[k] <= hi);
    }
    assert!(fit.params.validate().is_ok());
}

#[test]
fn truth_beats_doubled_beta() {
    let p = ModelParams {
        kappa: 0.0,
        ..ModelParams::default()
    };
    let y = simulated_closes(&p, 10.0, 763, 11);
    let nll = |beta: f64| {
        let m = StateSpaceModel::new(ModelParams { beta, ..p }, 1e-8, SsmConfig::default());
        ekf_filter_loglik(&y, &m).unwrap().neg_loglik
    };
    assert!(
        nll(p.beta) <= nll(2.0 * p.beta),
        "{} vs {}",
        nll(p.beta),
        nll(2.0 * p.beta)
    );
}
