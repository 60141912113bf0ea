//! Moving-window calibration and out-of-sample pricing of option quotes.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ekf::{ekf_filter_loglik, SsmConfig, StateSpaceModel};
use super::gbm::{gbm_mle, GbmFit};
use super::mle::{
    calibrate_liquidity, theta_of, with_theta, CalibrationResult, LiquidityCalibration, THETA_NAMES,
};
use super::optimize::OptimizeOptions;
use super::{bucket_moneyness, rmse, Moneyness};
use crate::adi::{price_both, AdiOptions};
use crate::data::{FuturesSeries, OptionQuote};
use crate::error::{CalibrationError, PdeError};
use crate::model::{build_grid, GridSpec, ModelParams};
use crate::surface::interpolate_price;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub window_len: usize,
    pub shift: usize,
    pub n_windows: usize,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            window_len: 762,
            shift: 5,
            n_windows: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrateConfig {
    pub windows: WindowSpec,
    pub ssm: SsmConfig,
    /// Supplies `r`, `kappa` and the other fields that are not estimated.
    pub base: ModelParams,
    pub optimizer: OptimizeOptions,
    /// Estimate `lambda` and `zeta` instead of pinning them at 5 and 0.5.
    pub free_lambda_zeta: bool,
    pub std_errors: bool,
}

impl Default for CalibrateConfig {
    fn default() -> Self {
        Self {
            windows: WindowSpec::default(),
            ssm: SsmConfig::default(),
            base: ModelParams {
                r: 0.02,
                kappa: 5e-5,
                ..ModelParams::default()
            },
            optimizer: OptimizeOptions {
                max_evals: 4000,
                ..OptimizeOptions::default()
            },
            free_lambda_zeta: false,
            std_errors: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRow {
    pub parameter: String,
    pub estimate: f64,
    pub t_stat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub parameters: Vec<ParamRow>,
    pub neg_loglik: Option<f64>,
    pub converged: bool,
}

impl ModelFit {
    pub fn estimate(&self, name: &str) -> Option<f64> {
        self.parameters
            .iter()
            .find(|r| r.parameter == name)
            .map(|r| r.estimate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowFit {
    pub window: usize,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub gbm: ModelFit,
    pub liquidity: ModelFit,
    /// Measurement noise variance of the liquidity filter.
    pub meas_var: f64,
}

/// Estimates averaged across windows, plus every window's own fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSummary {
    pub gbm: ModelFit,
    pub liquidity: ModelFit,
    pub meas_var: f64,
    pub windows: Vec<WindowFit>,
}

impl CalibrationSummary {
    /// Averaged liquidity parameters on top of `base`.
    pub fn liquidity_params(&self, base: &ModelParams) -> ModelParams {
        let theta: Vec<f64> = THETA_NAMES
            .iter()
            .map(|n| self.liquidity.estimate(n).unwrap_or(f64::NAN))
            .collect();
        with_theta(base, &theta)
    }

    pub fn gbm_sigma(&self) -> f64 {
        self.gbm.estimate("sigma").unwrap_or(f64::NAN)
    }
}

fn gbm_fit(fit: &GbmFit) -> ModelFit {
    let t = |v: f64, se: f64| (se > 0.0).then(|| v / se);
    ModelFit {
        parameters: vec![
            ParamRow {
                parameter: "mu".into(),
                estimate: fit.mu,
                t_stat: t(fit.mu, fit.stderr_mu),
            },
            ParamRow {
                parameter: "sigma".into(),
                estimate: fit.sigma,
                t_stat: t(fit.sigma, fit.stderr_sigma),
            },
        ],
        neg_loglik: fit.loglik.map(|v| -v),
        converged: !fit.degenerate,
    }
}

fn liquidity_fit(res: &CalibrationResult) -> ModelFit {
    let t = res.t_stats();
    ModelFit {
        parameters: THETA_NAMES
            .iter()
            .zip(&res.theta_hat)
            .zip(t)
            .map(|((n, v), t)| ParamRow {
                parameter: n.to_string(),
                estimate: *v,
                t_stat: t,
            })
            .collect(),
        neg_loglik: Some(res.neg_loglik),
        converged: res.converged,
    }
}

fn average(fits: &[&ModelFit]) -> ModelFit {
    let n = fits.len() as f64;
    let mean_opt = |vals: Vec<Option<f64>>| -> Option<f64> {
        let v: Vec<f64> = vals.into_iter().flatten().collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    let parameters = fits[0]
        .parameters
        .iter()
        .enumerate()
        .map(|(k, row)| ParamRow {
            parameter: row.parameter.clone(),
            estimate: fits.iter().map(|f| f.parameters[k].estimate).sum::<f64>() / n,
            t_stat: mean_opt(fits.iter().map(|f| f.parameters[k].t_stat).collect()),
        })
        .collect();
    ModelFit {
        parameters,
        neg_loglik: mean_opt(fits.iter().map(|f| f.neg_loglik).collect()),
        converged: fits.iter().all(|f| f.converged),
    }
}

/// Fits both models on every window (in parallel) and averages the estimates.
pub fn calibrate_windows(
    series: &FuturesSeries,
    cfg: &CalibrateConfig,
) -> Result<CalibrationSummary, CalibrationError> {
    let w = cfg.windows;
    let needed = w.window_len + w.shift * w.n_windows.saturating_sub(1);
    if series.len() < needed || w.n_windows == 0 || w.window_len < 3 {
        return Err(CalibrationError::TooFewObservations {
            needed: needed.max(3),
            got: series.len(),
        });
    }
    let windows: Vec<WindowFit> = (0..w.n_windows)
        .into_par_iter()
        .map(|k| {
            let start = k * w.shift;
            let closes = &series.closes[start..start + w.window_len];
            let gbm = gbm_mle(closes, cfg.ssm.dt)?;
            let mut lc = LiquidityCalibration::from_prices(closes, cfg.ssm, cfg.base)?;
            lc.optimizer = cfg.optimizer;
            lc.std_errors = cfg.std_errors;
            if cfg.free_lambda_zeta {
                lc.fixed[9] = false;
                lc.fixed[10] = false;
            }
            let liq = calibrate_liquidity(closes, &lc)?;
            Ok(WindowFit {
                window: k + 1,
                start: series.dates[start],
                end: series.dates[start + w.window_len - 1],
                gbm: gbm_fit(&gbm),
                liquidity: liquidity_fit(&liq),
                meas_var: liq.meas_var,
            })
        })
        .collect::<Result<_, CalibrationError>>()?;
    let gbm = average(&windows.iter().map(|w| &w.gbm).collect::<Vec<_>>());
    let liquidity = average(&windows.iter().map(|w| &w.liquidity).collect::<Vec<_>>());
    let meas_var = windows.iter().map(|w| w.meas_var).sum::<f64>() / windows.len() as f64;
    Ok(CalibrationSummary {
        gbm,
        liquidity,
        meas_var,
        windows,
    })
}

/// PDE grid used to price quotes. The number of time levels is raised until
/// the explicit `L = 0` row is stable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalGrid {
    pub n_s: usize,
    pub n_l: usize,
    pub min_steps: usize,
    pub spec: GridSpec,
    /// Target for `dtau` times the largest rate of the `L = 0` row.
    pub cfl: f64,
}

impl Default for EvalGrid {
    fn default() -> Self {
        Self {
            n_s: 200,
            n_l: 40,
            min_steps: 50,
            spec: GridSpec {
                s_max_mult: 2.0,
                l_max: 5.0,
            },
            cfl: 0.9,
        }
    }
}

/// One option to price: strike, time to expiry in years, underlying, illiquidity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuotePoint {
    pub strike: f64,
    pub maturity: f64,
    pub s0: f64,
    pub l0: f64,
}

fn time_steps(p: &ModelParams, grid: &EvalGrid) -> usize {
    let i = (grid.n_s - 2) as f64;
    let dl = grid.spec.l_max / (grid.n_l - 1) as f64;
    let rate = p.sigma_s * p.sigma_s * i * i + 2.5 * p.sigma_l * p.sigma_l / (dl * dl) + p.r;
    let needed = (p.maturity * rate / grid.cfl).ceil() as usize;
    needed.max(grid.min_steps) + 1
}

/// Mid of holder and writer American prices for each point. Points sharing a
/// strike share one PDE march over the longest maturity; shorter maturities
/// are read off intermediate levels with linear interpolation in `tau`.
pub fn price_quotes(
    params: &ModelParams,
    points: &[QuotePoint],
    grid: &EvalGrid,
) -> Result<Vec<f64>, PdeError> {
    let mut by_strike: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (k, q) in points.iter().enumerate() {
        by_strike.entry(q.strike.to_bits()).or_default().push(k);
    }
    let groups: Vec<Vec<usize>> = by_strike.into_values().collect();
    let priced: Vec<Vec<(usize, f64)>> = groups
        .par_iter()
        .map(|idx| price_group(params, points, idx, grid))
        .collect::<Result<_, PdeError>>()?;
    let mut out = vec![0.0; points.len()];
    for (k, v) in priced.into_iter().flatten() {
        out[k] = v;
    }
    Ok(out)
}

fn price_group(
    params: &ModelParams,
    points: &[QuotePoint],
    idx: &[usize],
    grid: &EvalGrid,
) -> Result<Vec<(usize, f64)>, PdeError> {
    let strike = points[idx[0]].strike;
    let horizon = idx.iter().map(|&k| points[k].maturity).fold(0.0, f64::max);
    if !(horizon > 0.0) {
        return Ok(idx
            .iter()
            .map(|&k| (k, (strike - points[k].s0).max(0.0)))
            .collect());
    }
    let p = ModelParams {
        strike,
        maturity: horizon,
        ..*params
    };
    let g = build_grid(grid.n_s, grid.n_l, time_steps(&p, grid), &p, grid.spec)?;
    let opts = AdiOptions {
        retain_all: true,
        ..AdiOptions::default()
    };
    let (holder, writer) = price_both(&p, &g, &opts)?;
    let mut out = Vec::with_capacity(idx.len());
    for &k in idx {
        let q = points[k];
        let s = q.s0.clamp(0.0, g.s_max);
        let l = q.l0.clamp(0.0, g.l_max);
        let pos = (q.maturity.max(0.0) / g.dtau).min((g.n_t - 1) as f64);
        let n0 = (pos.floor() as usize).min(g.n_t - 2);
        let w = pos - n0 as f64;
        let mut mid = 0.0;
        for res in [&holder, &writer] {
            let a = interpolate_price(&res.surfaces[n0], &g, s, l)?;
            let b = interpolate_price(&res.surfaces[n0 + 1], &g, s, l)?;
            mid += 0.5 * ((1.0 - w) * a + w * b);
        }
        out.push((k, mid));
    }
    Ok(out)
}

/// Parameters used to price quotes in the evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedModels {
    pub liquidity: ModelParams,
    pub meas_var: f64,
    /// Volatility of the constant-volatility benchmark.
    pub gbm_sigma: f64,
}

impl FittedModels {
    pub fn from_summary(t: &CalibrationSummary, base: &ModelParams) -> Self {
        Self {
            liquidity: t.liquidity_params(base),
            meas_var: t.meas_var,
            gbm_sigma: t.gbm_sigma(),
        }
    }

    /// The benchmark: the same PDE with `beta = sigma_L = alpha = 0`, so
    /// illiquidity plays no role and only the cost term remains.
    pub fn benchmark(&self) -> ModelParams {
        ModelParams {
            beta: 0.0,
            sigma_l: 0.0,
            alpha: 0.0,
            sigma_s: self.gbm_sigma,
            ..self.liquidity
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuoteEvaluation {
    pub date: NaiveDate,
    pub strike: f64,
    pub expiry: NaiveDate,
    pub maturity: f64,
    pub underlying: f64,
    pub l_hat: f64,
    pub market: f64,
    pub gbm: f64,
    pub liquidity: f64,
    pub bucket: Moneyness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketRmse {
    /// `OTM`, `ATM`, `ITM` or `ALL`.
    pub bucket: String,
    pub n_quotes: usize,
    pub rmse_gbm: Option<f64>,
    pub rmse_liquidity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub by_bucket: Vec<BucketRmse>,
    pub quotes: Vec<QuoteEvaluation>,
}

/// Filtered illiquidity on each date of `series`.
pub fn filtered_liquidity(
    series: &FuturesSeries,
    fitted: &FittedModels,
    ssm: SsmConfig,
) -> Result<Vec<f64>, CalibrationError> {
    let model = StateSpaceModel::new(fitted.liquidity, fitted.meas_var, ssm);
    Ok(ekf_filter_loglik(&series.closes, &model)?
        .states
        .iter()
        .map(|s| s.l)
        .collect())
}

/// Prices every quote under both models and reports RMSE per moneyness bucket.
///
/// Illiquidity at a quote date is the filtered value on the last series date
/// not after it, or `theta_bar` if the quote predates the series.
pub fn evaluate_quotes(
    series: &FuturesSeries,
    quotes: &[OptionQuote],
    fitted: &FittedModels,
    ssm: SsmConfig,
    grid: &EvalGrid,
) -> Result<Evaluation, CalibrationError> {
    let l_path = filtered_liquidity(series, fitted, ssm)?;
    let l_at = |d: NaiveDate| -> f64 {
        match series.dates.partition_point(|x| *x <= d) {
            0 => fitted.liquidity.theta_bar,
            k => l_path[k - 1],
        }
    };
    let points: Vec<QuotePoint> = quotes
        .iter()
        .map(|q| QuotePoint {
            strike: q.strike,
            maturity: q.maturity(),
            s0: q.underlying_close,
            l0: l_at(q.date),
        })
        .collect();
    let liq = price_quotes(&fitted.liquidity, &points, grid)?;
    let gbm = price_quotes(&fitted.benchmark(), &points, grid)?;

    let mut evals = Vec::with_capacity(quotes.len());
    for (k, q) in quotes.iter().enumerate() {
        evals.push(QuoteEvaluation {
            date: q.date,
            strike: q.strike,
            expiry: q.expiry,
            maturity: points[k].maturity,
            underlying: q.underlying_close,
            l_hat: points[k].l0,
            market: q.price,
            gbm: gbm[k],
            liquidity: liq[k],
            bucket: bucket_moneyness(q.underlying_close, q.strike)?,
        });
    }
    let row = |label: &str, sel: &[&QuoteEvaluation]| -> Result<BucketRmse, CalibrationError> {
        let market: Vec<f64> = sel.iter().map(|e| e.market).collect();
        let g: Vec<f64> = sel.iter().map(|e| e.gbm).collect();
        let l: Vec<f64> = sel.iter().map(|e| e.liquidity).collect();
        let (rmse_gbm, rmse_liquidity) = if sel.is_empty() {
            (None, None)
        } else {
            (Some(rmse(&g, &market)?), Some(rmse(&l, &market)?))
        };
        Ok(BucketRmse {
            bucket: label.to_string(),
            n_quotes: sel.len(),
            rmse_gbm,
            rmse_liquidity,
        })
    };
    let mut by_bucket = Vec::new();
    for b in Moneyness::ALL {
        let sel: Vec<&QuoteEvaluation> = evals.iter().filter(|e| e.bucket == b).collect();
        by_bucket.push(row(b.label(), &sel)?);
    }
    by_bucket.push(row("ALL", &evals.iter().collect::<Vec<_>>())?);
    Ok(Evaluation {
        by_bucket,
        quotes: evals,
    })
}

/// Parameter vector of `p` in [`THETA_NAMES`] order, for reporting.
pub fn theta_rows(p: &ModelParams) -> Vec<ParamRow> {
    THETA_NAMES
        .iter()
        .zip(theta_of(p))
        .map(|(n, v)| ParamRow {
            parameter: n.to_string(),
            estimate: v,
            t_stat: None,
        })
        .collect()
}
