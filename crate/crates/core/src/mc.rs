//! Euler-Maruyama simulation of `(S, L)` and a Monte Carlo price for the
//! European put without transaction costs.
//!
//! Paths are generated in fixed-size blocks. Block `b` draws from a ChaCha8
//! stream seeded with the master seed and stream id `b`, and block sums are
//! merged in block order, so the output does not depend on the number of
//! worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::McError;
use crate::model::ModelParams;

/// Antithetic pairs per block.
const BLOCK_PAIRS: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    /// Asset drift `r`.
    RiskNeutral,
    /// Asset drift `mu`.
    Physical,
}

/// How the simulation treats `L < 0`, which the OU process allows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativeLiquidity {
    /// Keep the sign and use `|L|^zeta` in the reversion level.
    #[default]
    Magnitude,
    /// Reflect at zero after every step.
    Reflect,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    pub measure: Measure,
    pub liquidity: NegativeLiquidity,
    /// Pair path `2k + 1` with the mirrored normals of path `2k`.
    pub antithetic: bool,
    /// Keep whole paths, not only terminal values.
    pub keep_paths: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_paths: 400_000,
            n_steps: 252,
            seed: 20_240_101,
            measure: Measure::RiskNeutral,
            liquidity: NegativeLiquidity::Magnitude,
            antithetic: true,
            keep_paths: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathBatch {
    pub s_terminal: Vec<f64>,
    pub l_terminal: Vec<f64>,
    /// `n_steps + 1` points per path when requested.
    pub s_paths: Option<Vec<Vec<f64>>>,
    pub l_paths: Option<Vec<Vec<f64>>>,
    pub seed: u64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub dt: f64,
    pub measure: Measure,
}

/// Loadings of `(dW^gamma, dW^S, dW^L)` on three independent normals.
#[derive(Debug, Clone, Copy)]
struct Loadings {
    s1: f64,
    s2: f64,
    l1: f64,
    l2: f64,
    l3: f64,
}

impl Loadings {
    fn new(p: &ModelParams) -> Result<Self, McError> {
        let one_minus = 1.0 - p.rho1 * p.rho1;
        let (s2, l2) = if one_minus > 1e-14 {
            let root = one_minus.sqrt();
            (root, (p.rho2 - p.rho1 * p.rho3) / root)
        } else {
            (0.0, 0.0)
        };
        let radicand = 1.0 - p.rho3 * p.rho3 - l2 * l2;
        if radicand < -1e-12 {
            return Err(McError::NegativeRadicand(radicand));
        }
        Ok(Self {
            s1: p.rho1,
            s2,
            l1: p.rho3,
            l2,
            l3: radicand.max(0.0).sqrt(),
        })
    }

    #[inline]
    fn apply(&self, z: [f64; 3], sqrt_dt: f64) -> (f64, f64, f64) {
        (
            sqrt_dt * z[0],
            sqrt_dt * (self.s1 * z[0] + self.s2 * z[1]),
            sqrt_dt * (self.l1 * z[0] + self.l2 * z[1] + self.l3 * z[2]),
        )
    }
}

/// `(dW^gamma, dW^S, dW^L)` from independent standard normals.
pub fn correlated_increments(
    z1: f64,
    z2: f64,
    z3: f64,
    p: &ModelParams,
    dt: f64,
) -> Result<(f64, f64, f64), McError> {
    Ok(Loadings::new(p)?.apply([z1, z2, z3], dt.sqrt()))
}

struct Stepper {
    dt: f64,
    sqrt_dt: f64,
    drift: f64,
    beta: f64,
    sigma_s: f64,
    sigma_l: f64,
    alpha: f64,
    theta_bar: f64,
    /// `kappa_theta * lambda`
    coupling: f64,
    zeta: f64,
    reflect: bool,
    loadings: Loadings,
}

impl Stepper {
    fn new(
        p: &ModelParams,
        dt: f64,
        measure: Measure,
        liquidity: NegativeLiquidity,
    ) -> Result<Self, McError> {
        Ok(Self {
            dt,
            sqrt_dt: dt.sqrt(),
            drift: match measure {
                Measure::RiskNeutral => p.r,
                Measure::Physical => p.mu,
            },
            beta: p.beta,
            sigma_s: p.sigma_s,
            sigma_l: p.sigma_l,
            alpha: p.alpha,
            theta_bar: p.theta_bar,
            coupling: p.kappa_theta() * p.lambda,
            zeta: p.zeta,
            reflect: liquidity == NegativeLiquidity::Reflect,
            loadings: Loadings::new(p)?,
        })
    }

    #[inline]
    fn theta(&self, l: f64) -> f64 {
        if self.coupling == 0.0 || l == 0.0 {
            return self.theta_bar;
        }
        let m = l.abs();
        let g = if self.zeta == 0.5 {
            m.sqrt()
        } else {
            m.powf(self.zeta)
        };
        self.theta_bar + self.coupling * g
    }

    #[inline]
    fn step(&self, s: &mut f64, l: &mut f64, z: [f64; 3]) {
        let (dw_g, dw_s, dw_l) = self.loadings.apply(z, self.sqrt_dt);
        let l0 = *l;
        let growth = 1.0 + self.drift * self.dt + self.beta * l0 * dw_g + self.sigma_s * dw_s;
        *s = (*s * growth).max(1e-12);
        let mut l1 = l0 + self.alpha * (self.theta(l0) - l0) * self.dt + self.sigma_l * dw_l;
        if self.reflect {
            l1 = l1.abs();
        }
        *l = l1;
    }
}

#[inline]
fn normals(rng: &mut ChaCha8Rng) -> [f64; 3] {
    [
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    ]
}

fn block_rng(seed: u64, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    rng
}

/// Simulates `n_paths` paths of `(S, L)` over `[0, horizon]`.
pub fn simulate_paths(
    p: &ModelParams,
    s0: f64,
    l0: f64,
    horizon: f64,
    cfg: &SimConfig,
) -> Result<PathBatch, McError> {
    if cfg.n_paths == 0 {
        return Err(McError::TooFew("n_paths", 1));
    }
    if cfg.n_steps == 0 {
        return Err(McError::TooFew("n_steps", 1));
    }
    let dt = horizon / cfg.n_steps as f64;
    let stepper = Stepper::new(p, dt, cfg.measure, cfg.liquidity)?;
    let per_block = if cfg.antithetic {
        2 * BLOCK_PAIRS
    } else {
        BLOCK_PAIRS
    };
    let n_blocks = cfg.n_paths.div_ceil(per_block);

    type Block = (Vec<f64>, Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>);
    let blocks: Vec<Block> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(cfg.seed, b);
            let first = b * per_block;
            let count = per_block.min(cfg.n_paths - first);
            let mut s_t = Vec::with_capacity(count);
            let mut l_t = Vec::with_capacity(count);
            let mut s_paths = Vec::new();
            let mut l_paths = Vec::new();
            let mut k = 0;
            while k < count {
                let width = if cfg.antithetic { 2.min(count - k) } else { 1 };
                let mut s = [s0; 2];
                let mut l = [l0; 2];
                let mut sp = vec![Vec::new(); width];
                let mut lp = vec![Vec::new(); width];
                if cfg.keep_paths {
                    for w in 0..width {
                        sp[w].reserve(cfg.n_steps + 1);
                        lp[w].reserve(cfg.n_steps + 1);
                        sp[w].push(s0);
                        lp[w].push(l0);
                    }
                }
                for _ in 0..cfg.n_steps {
                    let z = normals(&mut rng);
                    for w in 0..width {
                        let zz = if w == 0 { z } else { [-z[0], -z[1], -z[2]] };
                        stepper.step(&mut s[w], &mut l[w], zz);
                        if cfg.keep_paths {
                            sp[w].push(s[w]);
                            lp[w].push(l[w]);
                        }
                    }
                }
                for w in 0..width {
                    s_t.push(s[w]);
                    l_t.push(l[w]);
                }
                if cfg.keep_paths {
                    s_paths.extend(sp);
                    l_paths.extend(lp);
                }
                k += width;
            }
            (s_t, l_t, s_paths, l_paths)
        })
        .collect();

    let mut batch = PathBatch {
        s_terminal: Vec::with_capacity(cfg.n_paths),
        l_terminal: Vec::with_capacity(cfg.n_paths),
        s_paths: cfg.keep_paths.then(Vec::new),
        l_paths: cfg.keep_paths.then(Vec::new),
        seed: cfg.seed,
        n_steps: cfg.n_steps,
        n_paths: cfg.n_paths,
        dt,
        measure: cfg.measure,
    };
    for (s_t, l_t, sp, lp) in blocks {
        batch.s_terminal.extend(s_t);
        batch.l_terminal.extend(l_t);
        if let (Some(a), Some(b)) = (batch.s_paths.as_mut(), batch.l_paths.as_mut()) {
            a.extend(sp);
            b.extend(lp);
        }
    }
    Ok(batch)
}

/// Compensated summation.
#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    #[inline]
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    /// Total number of paths; rounded up to an even count for the antithetic pairs.
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    pub liquidity: NegativeLiquidity,
}

impl Default for McOptions {
    fn default() -> Self {
        let sim = SimConfig::default();
        Self {
            n_paths: sim.n_paths,
            n_steps: sim.n_steps,
            seed: sim.seed,
            liquidity: sim.liquidity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McPrice {
    pub price: f64,
    pub stderr: f64,
    pub n_paths: usize,
    pub seed: u64,
}

/// European put `E[e^{-rT} (K - S_T)^+]` under the risk-neutral measure.
/// `p.kappa` only enters through the reversion level; the payoff carries no
/// hedging costs.
pub fn price_european_mc(
    p: &ModelParams,
    s0: f64,
    l0: f64,
    opts: &McOptions,
) -> Result<McPrice, McError> {
    if opts.n_steps == 0 {
        return Err(McError::TooFew("n_steps", 1));
    }
    let n_pairs = opts.n_paths.div_ceil(2).max(1);
    if n_pairs < 2 {
        return Err(McError::TooFew("n_paths", 4));
    }
    // a zero strike is a valid (worthless) contract even though the pricer grids reject it
    let mut checked = *p;
    if checked.strike == 0.0 {
        checked.strike = 1.0;
    }
    checked.validate()?;

    let dt = p.maturity / opts.n_steps as f64;
    let stepper = Stepper::new(p, dt, Measure::RiskNeutral, opts.liquidity)?;
    let strike = p.strike;
    let discount = (-p.r * p.maturity).exp();
    let n_blocks = n_pairs.div_ceil(BLOCK_PAIRS);

    let sums: Vec<(Kahan, Kahan)> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(opts.seed, b);
            let count = BLOCK_PAIRS.min(n_pairs - b * BLOCK_PAIRS);
            let mut sum = Kahan::default();
            let mut sq = Kahan::default();
            for _ in 0..count {
                let (mut s_a, mut l_a, mut s_b, mut l_b) = (s0, l0, s0, l0);
                for _ in 0..opts.n_steps {
                    let z = normals(&mut rng);
                    stepper.step(&mut s_a, &mut l_a, z);
                    stepper.step(&mut s_b, &mut l_b, [-z[0], -z[1], -z[2]]);
                }
                let pair = 0.5 * ((strike - s_a).max(0.0) + (strike - s_b).max(0.0)) * discount;
                sum.add(pair);
                sq.add(pair * pair);
            }
            (sum, sq)
        })
        .collect();

    let mut sum = Kahan::default();
    let mut sq = Kahan::default();
    for (a, b) in sums {
        sum.add(a.sum);
        sq.add(b.sum);
    }
    let n = n_pairs as f64;
    let mean = sum.sum / n;
    let var = ((sq.sum - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(McPrice {
        price: mean,
        stderr: (var / n).sqrt(),
        n_paths: 2 * n_pairs,
        seed: opts.seed,
    })
}
