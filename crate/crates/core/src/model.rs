//! Model parameters, the liquidity-dependent mean-reversion level and the
//! uniform computational grid.
//!
//! The asset follows
//!
//! ```text
//! dS = mu S dt + beta L S dW^g + sigma_S S dW^S
//! dL = alpha (theta(L) - L) dt + sigma_L dW^L
//! theta(L) = theta_bar + kappa lambda L^zeta
//! ```
//!
//! with `corr(W^g, W^S) = rho1`, `corr(W^L, W^S) = rho2`,
//! `corr(W^g, W^L) = rho3`.

use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Smallest eigenvalue tolerated for the 3x3 correlation matrix.
pub const PSD_TOLERANCE: f64 = -1e-10;

/// Market, model, cost and contract parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Physical drift; only used by path simulation and calibration.
    pub mu: f64,
    pub alpha: f64,
    pub theta_bar: f64,
    pub sigma_s: f64,
    pub sigma_l: f64,
    pub beta: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    pub lambda: f64,
    pub zeta: f64,
    pub r: f64,
    /// Proportional transaction cost rate charged on hedge rebalancing.
    pub kappa: f64,
    /// Cost rate entering the mean-reversion level. `None` means "same as `kappa`".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_theta: Option<f64>,
    /// Hedging interval in years.
    pub delta_t: f64,
    pub strike: f64,
    pub maturity: f64,
}

impl Default for ModelParams {
    /// The reference parameter set used throughout the numerical study,
    /// with `kappa = 0.8%`.
    fn default() -> Self {
        Self {
            mu: 0.02,
            alpha: 2.0,
            theta_bar: 0.6,
            sigma_s: 0.3,
            sigma_l: 0.2,
            beta: 0.4,
            rho1: 0.2,
            rho2: 0.5,
            rho3: 0.3,
            lambda: 5.0,
            zeta: 0.5,
            r: 0.02,
            kappa: 0.008,
            kappa_theta: None,
            delta_t: 1.0 / 12.0,
            strike: 10.0,
            maturity: 1.0,
        }
    }
}

/// Names accepted by [`ModelParams::set`] and the `key=value` config format.
pub const PARAM_KEYS: &[&str] = &[
    "mu",
    "alpha",
    "theta_bar",
    "sigma_s",
    "sigma_l",
    "beta",
    "rho1",
    "rho2",
    "rho3",
    "lambda",
    "zeta",
    "r",
    "kappa",
    "kappa_theta",
    "delta_t",
    "strike",
    "maturity",
];

impl ModelParams {
    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    /// Rate used inside the mean-reversion level.
    pub fn kappa_theta(&self) -> f64 {
        self.kappa_theta.unwrap_or(self.kappa)
    }

    pub fn payoff(&self, s: f64) -> f64 {
        (self.strike - s).max(0.0)
    }

    /// Correlation matrix of `(W^g, W^S, W^L)`.
    pub fn correlation_matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            1.0, self.rho1, self.rho3, //
            self.rho1, 1.0, self.rho2, //
            self.rho3, self.rho2, 1.0,
        )
    }

    pub fn min_correlation_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.correlation_matrix())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn validate(self) -> Result<Self, ModelError> {
        validate_params(self)
    }

    /// Long-run illiquidity level `theta_bar + kappa lambda l^zeta`.
    pub fn theta_effective(&self, l: f64) -> Result<f64, ModelError> {
        if l < 0.0 || l.is_nan() {
            return Err(ModelError::NegativeLiquidity(l));
        }
        Ok(self.theta_effective_abs(l))
    }

    /// Same as [`theta_effective`](Self::theta_effective) but takes the power of `|l|`,
    /// so it is defined for the negative excursions an OU path can make.
    #[inline]
    pub fn theta_effective_abs(&self, l: f64) -> f64 {
        let g = if l == 0.0 {
            0.0
        } else {
            l.abs().powf(self.zeta)
        };
        self.theta_bar + self.kappa_theta() * self.lambda * g
    }

    /// Instantaneous variance rate of `dS/S` at illiquidity `l`.
    #[inline]
    pub fn local_variance(&self, l: f64) -> f64 {
        self.beta * self.beta * l * l
            + self.sigma_s * self.sigma_s
            + 2.0 * self.rho1 * self.sigma_s * self.beta * l
    }

    /// Sets one parameter by its config key.
    pub fn set(&mut self, key: &str, value: f64) -> Result<(), ModelError> {
        match key {
            "mu" => self.mu = value,
            "alpha" => self.alpha = value,
            "theta_bar" => self.theta_bar = value,
            "sigma_s" => self.sigma_s = value,
            "sigma_l" => self.sigma_l = value,
            "beta" => self.beta = value,
            "rho1" => self.rho1 = value,
            "rho2" => self.rho2 = value,
            "rho3" => self.rho3 = value,
            "lambda" => self.lambda = value,
            "zeta" => self.zeta = value,
            "r" => self.r = value,
            "kappa" => self.kappa = value,
            "kappa_theta" => self.kappa_theta = Some(value),
            "delta_t" => self.delta_t = value,
            "strike" | "k" => self.strike = value,
            "maturity" | "t" => self.maturity = value,
            other => return Err(ModelError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Renders the parameter set in the `key=value` config format with
    /// round-trip exact numbers.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: f64| {
            out.push_str(k);
            out.push('=');
            out.push_str(&format!("{v:?}"));
            out.push('\n');
        };
        push("mu", self.mu);
        push("alpha", self.alpha);
        push("theta_bar", self.theta_bar);
        push("sigma_s", self.sigma_s);
        push("sigma_l", self.sigma_l);
        push("beta", self.beta);
        push("rho1", self.rho1);
        push("rho2", self.rho2);
        push("rho3", self.rho3);
        push("lambda", self.lambda);
        push("zeta", self.zeta);
        push("r", self.r);
        push("kappa", self.kappa);
        if let Some(kt) = self.kappa_theta {
            push("kappa_theta", kt);
        }
        push("delta_t", self.delta_t);
        push("strike", self.strike);
        push("maturity", self.maturity);
        out
    }
}

/// Checks every parameter invariant and returns the set unchanged.
///
/// `beta = 0` is accepted so that the constant-volatility limit can be run
/// through the same code paths.
pub fn validate_params(raw: ModelParams) -> Result<ModelParams, ModelError> {
    let p = raw;
    let finite = [
        ("mu", p.mu),
        ("alpha", p.alpha),
        ("theta_bar", p.theta_bar),
        ("sigma_s", p.sigma_s),
        ("sigma_l", p.sigma_l),
        ("beta", p.beta),
        ("rho1", p.rho1),
        ("rho2", p.rho2),
        ("rho3", p.rho3),
        ("lambda", p.lambda),
        ("zeta", p.zeta),
        ("r", p.r),
        ("kappa", p.kappa),
        ("delta_t", p.delta_t),
        ("strike", p.strike),
        ("maturity", p.maturity),
    ];
    for (name, value) in finite {
        if !value.is_finite() {
            return Err(ModelError::InvalidParameter {
                name,
                value,
                reason: "not finite",
            });
        }
    }
    if p.sigma_s <= 0.0 {
        return Err(ModelError::NonPositiveVolatility {
            name: "sigma_s",
            value: p.sigma_s,
        });
    }
    if p.sigma_l < 0.0 {
        return Err(ModelError::NonPositiveVolatility {
            name: "sigma_l",
            value: p.sigma_l,
        });
    }
    if p.kappa < 0.0 {
        return Err(ModelError::NegativeKappa(p.kappa));
    }
    if let Some(kt) = p.kappa_theta {
        if !(kt >= 0.0) {
            return Err(ModelError::NegativeKappa(kt));
        }
    }
    if !(p.zeta > 0.0 && p.zeta <= 1.0) {
        return Err(ModelError::ZetaOutOfRange(p.zeta));
    }
    let nonneg = [("alpha", p.alpha), ("beta", p.beta), ("lambda", p.lambda)];
    for (name, value) in nonneg {
        if value < 0.0 {
            return Err(ModelError::InvalidParameter {
                name,
                value,
                reason: "must be non-negative",
            });
        }
    }
    let positive = [
        ("strike", p.strike),
        ("maturity", p.maturity),
        ("delta_t", p.delta_t),
    ];
    for (name, value) in positive {
        if value <= 0.0 {
            return Err(ModelError::InvalidParameter {
                name,
                value,
                reason: "must be positive",
            });
        }
    }
    for (name, value) in [("rho1", p.rho1), ("rho2", p.rho2), ("rho3", p.rho3)] {
        if value.abs() > 1.0 {
            return Err(ModelError::InvalidParameter {
                name,
                value,
                reason: "correlation must lie in [-1, 1]",
            });
        }
    }
    let min_eigenvalue = p.min_correlation_eigenvalue();
    if min_eigenvalue < PSD_TOLERANCE {
        return Err(ModelError::CorrelationNotPsd {
            rho1: p.rho1,
            rho2: p.rho2,
            rho3: p.rho3,
            min_eigenvalue,
        });
    }
    Ok(p)
}

/// Free function form of [`ModelParams::theta_effective`].
pub fn theta_effective(l: f64, p: &ModelParams) -> Result<f64, ModelError> {
    p.theta_effective(l)
}

/// Domain extent of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// `s_max = s_max_mult * strike`.
    pub s_max_mult: f64,
    pub l_max: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            s_max_mult: 8.0,
            l_max: 5.0,
        }
    }
}

/// Uniform `(S, L, tau)` grid. Node `i` sits at `s = i * ds` (zero based),
/// likewise for `L` and `tau`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n_s: usize,
    pub n_l: usize,
    pub n_t: usize,
    pub s_max: f64,
    pub l_max: f64,
    pub ds: f64,
    pub dl: f64,
    pub dtau: f64,
    pub s: Vec<f64>,
    pub l: Vec<f64>,
    pub tau: Vec<f64>,
}

impl Grid {
    pub fn new(n_s: usize, n_l: usize, n_t: usize, p: &ModelParams) -> Result<Self, ModelError> {
        build_grid(n_s, n_l, n_t, p, GridSpec::default())
    }

    /// Index of the last node with `s[i] <= s0`, clamped so that `i + 1` is valid.
    pub fn s_cell(&self, s0: f64) -> usize {
        cell_index(s0, self.ds, self.n_s)
    }

    pub fn l_cell(&self, l0: f64) -> usize {
        cell_index(l0, self.dl, self.n_l)
    }
}

fn cell_index(x: f64, h: f64, n: usize) -> usize {
    let k = (x / h).floor();
    if k < 0.0 {
        0
    } else {
        (k as usize).min(n - 2)
    }
}

/// Builds the uniform grid with `s_max = s_max_mult * K` and `l_max` from `spec`.
pub fn build_grid(
    n_s: usize,
    n_l: usize,
    n_t: usize,
    p: &ModelParams,
    spec: GridSpec,
) -> Result<Grid, ModelError> {
    if n_s < 4 || n_l < 4 || n_t < 2 {
        return Err(ModelError::GridTooSmall { n_s, n_l, n_t });
    }
    if !(spec.s_max_mult > 0.0) {
        return Err(ModelError::InvalidParameter {
            name: "s_max_mult",
            value: spec.s_max_mult,
            reason: "must be positive",
        });
    }
    if !(spec.l_max > 0.0) {
        return Err(ModelError::InvalidParameter {
            name: "l_max",
            value: spec.l_max,
            reason: "must be positive",
        });
    }
    let s_max = spec.s_max_mult * p.strike;
    let ds = s_max / (n_s - 1) as f64;
    let dl = spec.l_max / (n_l - 1) as f64;
    let dtau = p.maturity / (n_t - 1) as f64;
    Ok(Grid {
        n_s,
        n_l,
        n_t,
        s_max,
        l_max: spec.l_max,
        ds,
        dl,
        dtau,
        s: (0..n_s).map(|i| i as f64 * ds).collect(),
        l: (0..n_l).map(|j| j as f64 * dl).collect(),
        tau: (0..n_t).map(|n| n as f64 * dtau).collect(),
    })
}

/// Parses a flat `key=value` file. Blank lines and `#` comments are skipped.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, f64)>, ModelError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ModelError::MalformedConfig {
                line: idx + 1,
                message: format!("expected key=value, got `{line}`"),
            })?;
        let value: f64 = v.trim().parse().map_err(|_| ModelError::MalformedConfig {
            line: idx + 1,
            message: format!("`{}` is not a number", v.trim()),
        })?;
        out.push((k.trim().to_string(), value));
    }
    Ok(out)
}
