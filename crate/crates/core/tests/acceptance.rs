//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Set `LIQOPT_LONG_ACCEPTANCE=1` to add the
//! full-resolution explicit runs (hours on one core).

mod common;

use std::error::Error;
use std::process::ExitCode;
use std::time::Instant;

use common::{bs_put, LinearKalman};
use liqopt_core::calibration::evaluate::{
    calibrate_windows, evaluate_quotes, CalibrateConfig, EvalGrid, FittedModels,
};
use liqopt_core::calibration::{
    ekf_filter_loglik, gbm_mle, Measurement, SsmConfig, StateSpaceModel,
};
use liqopt_core::convergence::{adi_ladder, eoc_table, explicit_ladder, Direction, LadderPoint};
use liqopt_core::mc::{Measure, SimConfig};
use liqopt_core::{
    build_grid, load_futures_csv, load_options_csv, price_both, price_european_mc, price_explicit,
    price_holder, simulate_paths, AdiOptions, ExerciseStyle, ExplicitOptions, ExtractOptions, Grid,
    GridSpec, McOptions, ModelParams, PricingResult, Side,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Res<T> = Result<T, Box<dyn Error>>;

const S0S: [f64; 5] = [8.0, 9.0, 10.0, 11.0, 12.0];
const L0: f64 = 0.3;

const REF_HOLDER: [f64; 5] = [2.4469, 1.8482, 1.3750, 1.0056, 0.7236];
const REF_WRITER: [f64; 5] = [2.5735, 2.0038, 1.5452, 1.1783, 0.8895];
const REF_TOL: f64 = 5e-3;

const REF_EUROPEAN_ADI: f64 = 2.4672;
const REF_EUROPEAN: f64 = 2.4642;
const REF_EUROPEAN_TOL: f64 = 1e-2;

const SYMMETRY_TOL: f64 = 2e-3;
const EOC_MIN: f64 = 1.5;
const CROSS_TOL: f64 = 1e-2;
const QUOTED_BS_PUT: f64 = 2.2265;
const BS_TOL: f64 = 5e-3;
const KALMAN_TOL: f64 = 1e-8;
const INVARIANT_DRAWS: usize = 50;

struct Verdict {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

impl Verdict {
    fn new(pass: bool, summary: impl Into<String>) -> Self {
        Self {
            pass,
            summary: summary.into(),
            details: Vec::new(),
        }
    }

    fn with(mut self, details: Vec<String>) -> Self {
        self.details = details;
        self
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// ADI runs on the (100, 100, 1000) grid, shared between criteria.
struct AdiRuns {
    grid: Grid,
    by_kappa: Vec<(f64, PricingResult, PricingResult)>,
}

impl AdiRuns {
    fn new() -> Res<Self> {
        let base = ModelParams::default();
        let grid = Grid::new(100, 100, 1000, &base)?;
        let mut by_kappa = Vec::new();
        for kappa in [0.0, 0.004, 0.008] {
            let (h, w) = price_both(&base.with_kappa(kappa), &grid, &AdiOptions::default())?;
            by_kappa.push((kappa, h, w));
        }
        Ok(Self { grid, by_kappa })
    }

    fn at(&self, kappa: f64) -> (&PricingResult, &PricingResult) {
        let (_, h, w) = self
            .by_kappa
            .iter()
            .find(|(k, _, _)| *k == kappa)
            .expect("kappa was priced");
        (h, w)
    }
}

fn ac1(adi: &AdiRuns) -> Res<Verdict> {
    let (h, w) = adi.at(0.008);
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for (k, &s0) in S0S.iter().enumerate() {
        let (vh, vw) = (h.price_at(s0, L0)?, w.price_at(s0, L0)?);
        let (eh, ew) = (rel(vh, REF_HOLDER[k]), rel(vw, REF_WRITER[k]));
        worst = worst.max(eh).max(ew);
        details.push(format!(
            "S0 {s0:>4}: holder {vh:.6} (ref {:.4}, rel {eh:.1e})  writer {vw:.6} (ref {:.4}, rel {ew:.1e})",
            REF_HOLDER[k], REF_WRITER[k]
        ));
    }
    Ok(Verdict::new(
        worst < REF_TOL,
        format!("ADI reference prices, worst relative error {worst:.2e} (tol {REF_TOL:.0e})"),
    )
    .with(details))
}

fn ac2(adi: &AdiRuns) -> Res<Verdict> {
    let p = ModelParams::default().with_kappa(0.0);
    let (h, _) = price_both(&p, &adi.grid, &AdiOptions::european())?;
    let v = h.price_at(8.0, L0)?;
    let mc = price_european_mc(&p, 8.0, L0, &McOptions::default())?;
    let adi_err = rel(v, REF_EUROPEAN_ADI);
    let mc_tol = (REF_EUROPEAN_TOL * REF_EUROPEAN).max(3.0 * mc.stderr);
    let mc_err = (mc.price - REF_EUROPEAN).abs();
    Ok(Verdict::new(
        adi_err < REF_EUROPEAN_TOL && mc_err <= mc_tol,
        format!(
            "European kappa = 0 at S0 = 8: ADI {v:.6} (rel {adi_err:.1e} vs {REF_EUROPEAN_ADI}), MC {:.6} +- {:.1e} (|diff| {mc_err:.1e}, tol {mc_tol:.1e} vs {REF_EUROPEAN})",
            mc.price, mc.stderr
        ),
    ))
}

fn ac3(adi: &AdiRuns) -> Res<Verdict> {
    let mut pass = true;
    let mut details = Vec::new();
    for &s0 in &S0S {
        let mut hs = Vec::new();
        let mut ws = Vec::new();
        for kappa in [0.0, 0.004, 0.008] {
            let (h, w) = adi.at(kappa);
            hs.push(h.price_at(s0, L0)?);
            ws.push(w.price_at(s0, L0)?);
        }
        let ordered = hs[0] > hs[1] && hs[1] > hs[2] && ws[0] < ws[1] && ws[1] < ws[2];
        let gap = rel(hs[0], ws[0]);
        pass &= ordered && gap < SYMMETRY_TOL;
        details.push(format!(
            "S0 {s0:>4}: holder {:.5} > {:.5} > {:.5}, writer {:.5} < {:.5} < {:.5}, kappa = 0 gap {gap:.1e}",
            hs[0], hs[1], hs[2], ws[0], ws[1], ws[2]
        ));
    }
    Ok(Verdict::new(
        pass,
        format!("monotonicity in kappa and kappa = 0 symmetry (tol {SYMMETRY_TOL:.0e})"),
    )
    .with(details))
}

fn ladder_eocs(
    name: &str,
    counts: &[usize],
    ladder: &[LadderPoint],
    details: &mut Vec<String>,
) -> f64 {
    let mut worst = f64::INFINITY;
    for (side, values) in [
        (
            "holder",
            ladder.iter().map(|r| r.holder).collect::<Vec<_>>(),
        ),
        (
            "writer",
            ladder.iter().map(|r| r.writer).collect::<Vec<_>>(),
        ),
    ] {
        let rows = eoc_table(counts, &values);
        for r in &rows {
            details.push(format!(
                "{name} {side} N_tau {:>7}: {:.8}  diff {}  EOC {}  observed order {}",
                r.steps,
                r.value,
                r.difference.map_or("-".into(), |d| format!("{d:.3e}")),
                r.eoc.map_or("-".into(), |e| format!("{e:.3}")),
                r.observed_order.map_or("-".into(), |e| format!("{e:.3}")),
            ));
        }
        // a missing EOC past the second rung means a zero difference, which fails
        for r in &rows[2..] {
            worst = worst.min(r.eoc.unwrap_or(f64::NEG_INFINITY));
        }
    }
    worst
}

fn ac4_and_5(adi: &AdiRuns) -> Res<(Verdict, Verdict)> {
    let p = ModelParams::default();
    let spec = GridSpec::default();
    let mut details = Vec::new();

    let adi_counts = [2000, 3000, 4000, 5000];
    let adi_ladder = adi_ladder(
        &p,
        8.0,
        L0,
        (100, 80, 0),
        spec,
        Direction::Tau,
        &adi_counts,
        &AdiOptions::default(),
    )?;
    let adi_worst = ladder_eocs("ADI", &adi_counts, &adi_ladder, &mut details);

    let explicit_counts = [50_000, 100_000, 150_000, 200_000];
    let explicit_ladder = explicit_ladder(
        &p,
        8.0,
        L0,
        (100, 100, 0),
        spec,
        Direction::Tau,
        &explicit_counts,
        &ExplicitOptions::default(),
    )?;
    let explicit_worst = ladder_eocs("explicit", &explicit_counts, &explicit_ladder, &mut details);
    let eoc = Verdict::new(
        adi_worst >= EOC_MIN && explicit_worst >= EOC_MIN,
        format!(
            "tau EOC: ADI min {adi_worst:.3}, explicit min {explicit_worst:.3} (need >= {EOC_MIN})"
        ),
    )
    .with(details);

    // the 200k rung of the explicit ladder is the desk-scale reference grid
    let g = build_grid(100, 100, 200_000, &p, spec)?;
    let (eh, ew) = liqopt_core::price_explicit_both(&p, &g, &ExplicitOptions::default())?;
    let (ah, aw) = adi.at(0.008);
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for &s0 in &S0S {
        let (a1, e1) = (ah.price_at(s0, L0)?, eh.price_at(s0, L0)?);
        let (a2, e2) = (aw.price_at(s0, L0)?, ew.price_at(s0, L0)?);
        worst = worst.max(rel(a1, e1)).max(rel(a2, e2));
        details.push(format!(
            "S0 {s0:>4}: holder ADI {a1:.6} explicit {e1:.6} ({:.1e})  writer ADI {a2:.6} explicit {e2:.6} ({:.1e})",
            rel(a1, e1),
            rel(a2, e2)
        ));
    }
    let cross = Verdict::new(
        worst < CROSS_TOL,
        format!("ADI (100,100,1000) vs explicit (100,100,200000), worst relative difference {worst:.2e} (tol {CROSS_TOL:.0e})"),
    )
    .with(details);
    Ok((eoc, cross))
}

fn ac6() -> Res<Verdict> {
    let p = ModelParams {
        beta: 0.0,
        sigma_l: 0.0,
        alpha: 0.0,
        kappa: 0.0,
        ..ModelParams::default()
    };
    let exact = bs_put(8.0, p.strike, p.r, p.sigma_s, p.maturity);
    let g = Grid::new(100, 100, 1000, &p)?;
    let (adi, _) = price_both(&p, &g, &AdiOptions::european())?;
    // L is inert here, so the explicit run uses few L nodes
    let ge = Grid::new(100, 20, 20_000, &p)?;
    let opts = ExplicitOptions {
        style: ExerciseStyle::European,
        ..ExplicitOptions::default()
    };
    let explicit = price_explicit(&p, &ge, Side::Holder, &opts)?;
    let (a, e) = (adi.price_at(8.0, L0)?, explicit.price_at(8.0, L0)?);
    // the closed form is the oracle; the quoted 2.2265 is printed for reference only
    Ok(Verdict::new(
        rel(a, exact) < BS_TOL && rel(e, exact) < BS_TOL,
        format!(
            "Black-Scholes limit at S0 = 8 (sigma {}, r {}, K {}, T {}): closed form {exact:.6}, ADI {a:.6} ({:.1e}), explicit {e:.6} ({:.1e}) (tol {BS_TOL:.0e})",
            p.sigma_s,
            p.r,
            p.strike,
            p.maturity,
            rel(a, exact),
            rel(e, exact)
        ),
    )
    .with(vec![format!(
        "quoted reference {QUOTED_BS_PUT} differs from the closed form by {:.2e}",
        rel(QUOTED_BS_PUT, exact)
    )]))
}

fn ac7(adi: &AdiRuns) -> Res<Verdict> {
    let g = &adi.grid;
    let last = g.n_t - 1;
    let sf = |res: &PricingResult| res.boundary.as_ref().map(|b| b.interpolate(g, L0, last));
    let (h0, _) = adi.at(0.0);
    let (h8, _) = adi.at(0.008);
    let (sf0, sf8) = (sf(h0).ok_or("no boundary")?, sf(h8).ok_or("no boundary")?);
    let refine = AdiOptions {
        extract: ExtractOptions {
            refine: true,
            ..ExtractOptions::default()
        },
        ..AdiOptions::default()
    };
    let base = ModelParams::default();
    let r0 = price_holder(&base.with_kappa(0.0), g, &refine)?;
    let r8 = price_holder(&base, g, &refine)?;
    let (rf0, rf8) = (sf(&r0).ok_or("no boundary")?, sf(&r8).ok_or("no boundary")?);

    let mut prices = Vec::new();
    for alpha in [1.0, 2.0, 4.0] {
        let p = ModelParams { alpha, ..base };
        let (h, _) = price_both(&p, g, &AdiOptions::default())?;
        prices.push(h.price_at(8.0, L0)?);
    }
    let alpha_ok = prices.windows(2).all(|w| w[1] >= w[0]);
    // node values can tie within one S step, so the refined boundary decides
    Ok(Verdict::new(
        rf8 > rf0 && alpha_ok,
        format!(
            "Sf(0.3, T) refined: kappa 0.8% {rf8:.4} > kappa 0 {rf0:.4} (on nodes {sf8:.4} vs {sf0:.4}); holder at (8, 0.3) over alpha 1, 2, 4: {:.5}, {:.5}, {:.5}",
            prices[0], prices[1], prices[2]
        ),
    ))
}

fn ac8a() -> Res<Verdict> {
    let (mu, sigma) = (0.05, 0.25);
    let p = ModelParams {
        mu,
        sigma_s: sigma,
        beta: 0.0,
        sigma_l: 0.0,
        alpha: 0.0,
        ..ModelParams::default()
    };
    let dt = 1.0 / 252.0;
    let n = 5000;
    let cfg = SimConfig {
        n_paths: 1,
        n_steps: n,
        seed: 20_240_101,
        measure: Measure::Physical,
        antithetic: false,
        keep_paths: true,
        ..SimConfig::default()
    };
    let path = simulate_paths(&p, 100.0, 0.0, dt * n as f64, &cfg)?
        .s_paths
        .ok_or("no paths")?
        .remove(0);
    let fit = gbm_mle(&path, dt)?;
    // the closed form estimates the log-return drift
    let log_drift = mu - 0.5 * sigma * sigma;
    let (zm, zs) = (
        (fit.mu - log_drift) / fit.stderr_mu,
        (fit.sigma - sigma) / fit.stderr_sigma,
    );
    Ok(Verdict::new(
        zm.abs() <= 3.0 && zs.abs() <= 3.0,
        format!(
            "GBM MLE on {n} steps: mu {:.4} (log drift {log_drift:.4}, z {zm:+.2}), sigma {:.4} (true {sigma}, z {zs:+.2})",
            fit.mu, fit.sigma
        ),
    ))
}

fn ac8b() -> Res<Verdict> {
    let dt = 1.0 / 252.0;
    let p = ModelParams {
        mu: 0.05,
        beta: 0.0,
        kappa: 0.0,
        ..ModelParams::default()
    };
    let cfg = SimConfig {
        n_paths: 1,
        n_steps: 761,
        seed: 7,
        measure: Measure::Physical,
        antithetic: false,
        keep_paths: true,
        ..SimConfig::default()
    };
    let y = simulate_paths(&p, 10.0, p.theta_bar, dt * 761.0, &cfg)?
        .s_paths
        .ok_or("no paths")?
        .remove(0);
    let r = 1e-4;
    let ssm = SsmConfig {
        measurement: Measurement::Price,
        ..SsmConfig::default()
    };
    let ekf = ekf_filter_loglik(&y, &StateSpaceModel::new(p, r, ssm))?.neg_loglik;
    let kf = LinearKalman {
        f: [[1.0 + p.mu * dt, 0.0], [0.0, 1.0 - p.alpha * dt]],
        c: [0.0, p.alpha * p.theta_bar * dt],
        q: |x: [f64; 2]| {
            let q12 = x[0] * dt * p.sigma_l * p.sigma_s * p.rho2;
            [
                [x[0] * x[0] * dt * p.sigma_s * p.sigma_s, q12],
                [q12, p.sigma_l * p.sigma_l * dt],
            ]
        },
        r,
    };
    let p0 = [
        [1e-4 * y[0] * y[0], 0.0],
        [0.0, p.sigma_l * p.sigma_l / (2.0 * p.alpha)],
    ];
    let oracle = kf.neg_loglik(&y, [y[0], p.theta_bar], p0);
    let diff = (ekf - oracle).abs();
    Ok(Verdict::new(
        diff < KALMAN_TOL,
        format!("EKF vs linear Kalman filter (beta = 0, y = S): {ekf:.10} vs {oracle:.10}, |diff| {diff:.1e} (tol {KALMAN_TOL:.0e})"),
    ))
}

fn ac8c() -> Res<Verdict> {
    let dir = common::fixture_dir();
    let series = load_futures_csv(dir.join("futures.csv"))?;
    let quotes = load_options_csv(dir.join("options.csv"), 1200)?;
    let cfg = CalibrateConfig::default();
    let t7 = calibrate_windows(&series, &cfg)?;
    let fitted = FittedModels::from_summary(&t7, &cfg.base);
    let ev = evaluate_quotes(&series, &quotes, &fitted, cfg.ssm, &EvalGrid::default())?;

    let shaped = t7.gbm.parameters.len() == 2
        && t7.liquidity.parameters.len() == 11
        && t7.windows.len() == cfg.windows.n_windows
        && ev
            .by_bucket
            .iter()
            .map(|r| r.bucket.as_str())
            .eq(["OTM", "ATM", "ITM", "ALL"])
        && ev.quotes.len() == quotes.len();
    let mut details: Vec<String> = t7
        .liquidity
        .parameters
        .iter()
        .map(|r| {
            format!(
                "{:<9} {:>9.4}  t {}",
                r.parameter,
                r.estimate,
                r.t_stat.map_or("-".into(), |t| format!("{t:.2}"))
            )
        })
        .collect();
    details.push(format!(
        "GBM sigma {:.4}, mean neg loglik {:?}",
        t7.gbm_sigma(),
        t7.liquidity.neg_loglik
    ));
    let mut all = (f64::NAN, f64::NAN);
    for r in &ev.by_bucket {
        let (g, l) = (
            r.rmse_gbm.unwrap_or(f64::NAN),
            r.rmse_liquidity.unwrap_or(f64::NAN),
        );
        details.push(format!(
            "{:<3} n {:>3}  RMSE GBM {g:.4}  liquidity {l:.4}",
            r.bucket, r.n_quotes
        ));
        if r.bucket == "ALL" {
            all = (g, l);
        }
    }
    Ok(Verdict::new(
        shaped && all.1 <= all.0,
        format!(
            "fixture pipeline: {} quotes, liquidity RMSE {:.4} vs GBM {:.4} (need <=), outputs shaped {shaped}",
            ev.quotes.len(),
            all.1,
            all.0
        ),
    )
    .with(details))
}

fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
    loop {
        let p = ModelParams {
            alpha: rng.random_range(0.5..4.0),
            theta_bar: rng.random_range(0.1..1.0),
            sigma_s: rng.random_range(0.1..0.5),
            sigma_l: rng.random_range(0.05..0.4),
            beta: rng.random_range(0.0..0.8),
            rho1: rng.random_range(-0.6..0.6),
            rho2: rng.random_range(-0.6..0.6),
            rho3: rng.random_range(-0.6..0.6),
            r: rng.random_range(0.0..0.06),
            kappa: rng.random_range(0.001..0.02),
            maturity: rng.random_range(0.25..1.5),
            ..ModelParams::default()
        };
        if let Ok(p) = p.validate() {
            return p;
        }
    }
}

fn ac9() -> Res<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let spec = GridSpec::default();
    let mut failures: Vec<String> = Vec::new();
    for draw in 0..INVARIANT_DRAWS {
        let p = random_params(&mut rng);
        let rate =
            p.sigma_s * p.sigma_s * 39.0 * 39.0 + 2.5 * p.sigma_l * p.sigma_l / (0.25 * 0.25) + p.r;
        let n_t = ((p.maturity * rate / 0.8).ceil() as usize).max(100) + 1;
        let g = build_grid(41, 21, n_t, &p, spec)?;
        let all = AdiOptions {
            retain_all: true,
            ..AdiOptions::default()
        };
        let (h, w) = price_both(&p, &g, &all)?;
        let mut fail = |what: &str| failures.push(format!("draw {draw}: {what}"));

        if !h
            .surfaces
            .iter()
            .all(|v| (0..g.n_s).all(|i| (0..g.n_l).all(|j| v.get(i, j) >= p.payoff(g.s[i]))))
        {
            fail("holder below payoff");
        }
        for &s0 in &S0S {
            if h.price_at(s0, L0)? > w.price_at(s0, L0)? {
                fail("holder above writer");
            }
        }
        let b = h.boundary.as_ref().ok_or("no boundary")?;
        for n in 0..g.n_t - 1 {
            let v = &w.surfaces[n + 1];
            for j in 0..g.n_l {
                let sf = b.at(j, n);
                if (0..g.n_s).any(|i| g.s[i] <= sf && v.get(i, j) != p.payoff(g.s[i])) {
                    fail("writer differs from payoff in exercise region");
                }
            }
        }
        for (row, flags) in b.levels.iter().zip(&b.flags) {
            if row
                .iter()
                .zip(flags)
                .any(|(&sf, &flag)| !flag && !(sf > 0.0 && sf <= p.strike))
            {
                fail("boundary outside (0, K]");
            }
        }
        let mc = McOptions {
            n_paths: 2_000,
            n_steps: 20,
            seed: rng.random(),
            ..McOptions::default()
        };
        let q = ModelParams { kappa: 0.0, ..p };
        if price_european_mc(&q, 9.0, p.theta_bar, &mc)?
            != price_european_mc(&q, 9.0, p.theta_bar, &mc)?
        {
            fail("Monte Carlo not reproducible");
        }
    }
    failures.dedup();
    let n = failures.len();
    Ok(Verdict::new(
        n == 0,
        format!(
            "invariants over {INVARIANT_DRAWS} random admissible parameter draws: {n} violations"
        ),
    )
    .with(failures))
}

fn long_runs() -> Res<Verdict> {
    let p = ModelParams::default();
    let g = Grid::new(200, 200, 750_000, &p)?;
    let (h, w) = liqopt_core::price_explicit_both(&p, &g, &ExplicitOptions::default())?;
    let (vh, vw) = (h.price_at(8.0, L0)?, w.price_at(8.0, L0)?);
    let counts = [250_000, 500_000, 750_000, 1_000_000];
    let ladder = explicit_ladder(
        &p,
        8.0,
        L0,
        (100, 100, 0),
        GridSpec::default(),
        Direction::Tau,
        &counts,
        &ExplicitOptions::default(),
    )?;
    let mut details = Vec::new();
    let worst = ladder_eocs("explicit", &counts, &ladder, &mut details);
    Ok(Verdict::new(
        rel(vh, 2.4458) < 5e-3 && rel(vw, 2.5725) < 5e-3 && worst >= EOC_MIN,
        format!("explicit (200,200,750000) at S0 = 8: holder {vh:.6} writer {vw:.6} (ref 2.4458, 2.5725); 1e6-step ladder min EOC {worst:.3}"),
    )
    .with(details))
}

fn report(id: &str, started: Instant, result: Res<Verdict>) -> bool {
    let secs = started.elapsed().as_secs_f64();
    match result {
        Ok(v) => {
            println!(
                "{id} {} {} [{secs:.1}s]",
                if v.pass { "PASS" } else { "FAIL" },
                v.summary
            );
            for d in &v.details {
                println!("    {d}");
            }
            v.pass
        }
        Err(e) => {
            println!("{id} FAIL error: {e} [{secs:.1}s]");
            false
        }
    }
}

fn main() -> ExitCode {
    let mut ok = true;

    let t = Instant::now();
    let adi = match AdiRuns::new() {
        Ok(a) => a,
        Err(e) => {
            println!("AC1 FAIL error: {e}");
            return ExitCode::FAILURE;
        }
    };
    ok &= report("AC1", t, ac1(&adi));
    let t = Instant::now();
    ok &= report("AC2", t, ac2(&adi));
    let t = Instant::now();
    ok &= report("AC3", t, ac3(&adi));
    let t = Instant::now();
    match ac4_and_5(&adi) {
        Ok((eoc, cross)) => {
            ok &= report("AC4", t, Ok(eoc));
            ok &= report("AC5", t, Ok(cross));
        }
        Err(e) => {
            let msg = e.to_string();
            ok &= report("AC4", t, Err(msg.clone().into()));
            ok &= report("AC5", t, Err(msg.into()));
        }
    }
    let t = Instant::now();
    ok &= report("AC6", t, ac6());
    let t = Instant::now();
    ok &= report("AC7", t, ac7(&adi));
    let t = Instant::now();
    ok &= report("AC8a", t, ac8a());
    let t = Instant::now();
    ok &= report("AC8b", t, ac8b());
    let t = Instant::now();
    ok &= report("AC8c", t, ac8c());
    let t = Instant::now();
    ok &= report("AC9", t, ac9());
    if std::env::var_os("LIQOPT_LONG_ACCEPTANCE").is_some() {
        let t = Instant::now();
        ok &= report("LONG", t, long_runs());
    }

    if ok {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: at least one criterion failed");
        ExitCode::FAILURE
    }
}
