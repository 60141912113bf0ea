//! Synthetic futures and option-quote data drawn from the liquidity model
//! itself, so the calibration pipeline can run without market data.

use chrono::{Datelike, Days, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibration::evaluate::{price_quotes, EvalGrid, QuotePoint};
use crate::data::{FuturesSeries, OptionQuote};
use crate::error::{McError, PdeError};
use crate::mc::{simulate_paths, Measure, NegativeLiquidity, SimConfig};
use crate::model::ModelParams;

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error(transparent)]
    Mc(#[from] McError),
    #[error(transparent)]
    Pde(#[from] PdeError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureConfig {
    pub params: ModelParams,
    pub s0: f64,
    /// Number of daily closes.
    pub n_days: usize,
    pub dt: f64,
    pub seed: u64,
    pub start: NaiveDate,
    /// Option quotes are produced on this many final trading days.
    pub quote_days: usize,
    /// Strikes are `S * m` rounded to a multiple of `strike_step`.
    pub strike_multiples: Vec<f64>,
    pub strike_step: f64,
    /// Expiries as calendar days after the last trading day.
    pub expiry_offsets: Vec<u64>,
    /// Standard deviation of the multiplicative pricing noise.
    pub noise: f64,
    pub volume_range: (u64, u64),
    pub grid: EvalGrid,
}

impl Default for FixtureConfig {
    /// Parameters near the averaged estimates reported for soybean meal futures.
    fn default() -> Self {
        Self {
            params: ModelParams {
                mu: -0.0028,
                alpha: 1.9921,
                beta: 0.8161,
                theta_bar: 0.17,
                sigma_s: 0.1238,
                sigma_l: 0.1237,
                rho1: 0.2097,
                rho2: 0.5061,
                rho3: 0.3086,
                lambda: 5.0,
                zeta: 0.5,
                r: 0.02,
                kappa: 5e-5,
                ..ModelParams::default()
            },
            s0: 3000.0,
            n_days: 782,
            dt: 1.0 / 252.0,
            seed: 20_240_101,
            start: NaiveDate::from_ymd_opt(2022, 1, 4).expect("valid date"),
            quote_days: 20,
            strike_multiples: vec![0.92, 0.94, 0.96, 0.98, 1.0, 1.02, 1.04, 1.06, 1.08],
            strike_step: 50.0,
            expiry_offsets: vec![30, 60],
            noise: 0.01,
            volume_range: (500, 8000),
            grid: EvalGrid::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixtures {
    pub futures: FuturesSeries,
    pub options: Vec<OptionQuote>,
    /// Simulated illiquidity on each trading day.
    pub liquidity: Vec<f64>,
}

/// Weekdays from `start` onwards.
pub fn trading_days(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

fn cents(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

pub fn generate_fixtures(cfg: &FixtureConfig) -> Result<Fixtures, FixtureError> {
    let p = cfg.params;
    let sim = SimConfig {
        n_paths: 1,
        n_steps: cfg.n_days - 1,
        seed: cfg.seed,
        measure: Measure::Physical,
        liquidity: NegativeLiquidity::Magnitude,
        antithetic: false,
        keep_paths: true,
    };
    let horizon = cfg.dt * (cfg.n_days - 1) as f64;
    let batch = simulate_paths(&p, cfg.s0, p.theta_bar, horizon, &sim)?;
    let s_path = &batch.s_paths.as_ref().expect("paths kept")[0];
    let l_path = &batch.l_paths.as_ref().expect("paths kept")[0];
    let dates = trading_days(cfg.start, cfg.n_days);
    let closes: Vec<f64> = s_path.iter().map(|&s| cents(s)).collect();
    let last = dates[cfg.n_days - 1];

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let noise = Normal::new(0.0, cfg.noise).expect("finite noise");
    let mut draft = Vec::new();
    let mut points = Vec::new();
    for t in cfg.n_days.saturating_sub(cfg.quote_days)..cfg.n_days {
        let s = closes[t];
        let mut strikes: Vec<f64> = cfg
            .strike_multiples
            .iter()
            .map(|m| (s * m / cfg.strike_step).round() * cfg.strike_step)
            .collect();
        strikes.dedup();
        for &off in &cfg.expiry_offsets {
            let expiry = last + Days::new(off);
            for &k in &strikes {
                let q = OptionQuote {
                    date: dates[t],
                    strike: k,
                    expiry,
                    price: 0.0,
                    volume: rng.random_range(cfg.volume_range.0..=cfg.volume_range.1),
                    underlying_close: s,
                };
                points.push(QuotePoint {
                    strike: k,
                    maturity: q.maturity(),
                    s0: s,
                    l0: l_path[t].max(0.0),
                });
                draft.push(q);
            }
        }
    }
    let prices = price_quotes(&p, &points, &cfg.grid)?;
    for (q, v) in draft.iter_mut().zip(prices) {
        q.price = cents((v * (1.0 + noise.sample(&mut rng))).max(0.0));
    }
    Ok(Fixtures {
        futures: FuturesSeries { dates, closes },
        options: draft,
        liquidity: l_path.clone(),
    })
}
