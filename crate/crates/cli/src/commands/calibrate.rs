use anyhow::Context;
use liqopt_core::calibration::evaluate::{
    calibrate_windows, CalibrateConfig, CalibrationSummary, WindowSpec,
};
use liqopt_core::calibration::{Measurement, OptimizeOptions, ProcessNoise, SsmConfig};
use liqopt_core::{load_futures_csv, FuturesSeries};
use serde_json::json;

use crate::args::{
    CalibrateArgs, GridArgs, MeasurementArg, ModelArgs, ProcessNoiseArg, WindowArgs,
};
use crate::error::{Classify, Failure};
use crate::output::{opt6, sig6, Manifest, OutDir};
use crate::settings::{default_grid, resolve};

pub fn config(windows: &WindowArgs, model: &ModelArgs) -> Result<CalibrateConfig, Failure> {
    let defaults = CalibrateConfig::default();
    let base = resolve(model, &GridArgs::default(), defaults.base, default_grid())?.params;
    if !(windows.dt > 0.0) {
        return Err(Failure::Usage(anyhow::anyhow!("--dt must be positive")));
    }
    Ok(CalibrateConfig {
        windows: WindowSpec {
            window_len: windows.window_len,
            shift: windows.shift,
            n_windows: windows.windows,
        },
        ssm: SsmConfig {
            dt: windows.dt,
            measurement: match windows.measurement {
                MeasurementArg::LogPrice => Measurement::LogPrice,
                MeasurementArg::Price => Measurement::Price,
            },
            process_noise: match windows.process_noise {
                ProcessNoiseArg::AtMean => ProcessNoise::AtMean,
                ProcessNoiseArg::Expected => ProcessNoise::Expected,
            },
            ..SsmConfig::default()
        },
        base,
        optimizer: OptimizeOptions {
            max_evals: windows.max_evals,
            ..defaults.optimizer
        },
        free_lambda_zeta: windows.free_lambda_zeta,
        std_errors: !windows.no_std_errors,
    })
}

pub fn load_series(
    path: &std::path::Path,
    manifest: &mut Manifest,
) -> Result<FuturesSeries, Failure> {
    manifest.inputs.push(path.to_path_buf());
    load_futures_csv(path)
        .with_context(|| format!("cannot load futures from {}", path.display()))
        .input()
}

pub fn print_summary(t: &CalibrationSummary) {
    println!(
        "{:<10} {:>12} {:>10} {:>12} {:>10}",
        "parameter", "gbm", "t", "liquidity", "t"
    );
    for row in &t.liquidity.parameters {
        let g = t.gbm.parameters.iter().find(|r| {
            r.parameter == row.parameter || (r.parameter == "sigma" && row.parameter == "sigma_s")
        });
        println!(
            "{:<10} {:>12} {:>10} {:>12} {:>10}",
            row.parameter,
            opt6(g.map(|g| g.estimate)),
            opt6(g.and_then(|g| g.t_stat)),
            sig6(row.estimate),
            opt6(row.t_stat)
        );
    }
    println!(
        "{:<10} {:>12} {:>10} {:>12} {:>10}",
        "neg_loglik",
        opt6(t.gbm.neg_loglik),
        "",
        opt6(t.liquidity.neg_loglik),
        ""
    );
}

pub fn run(args: &CalibrateArgs, out: &OutDir, manifest: &mut Manifest) -> Result<(), Failure> {
    let cfg = config(&args.windows, &args.model)?;
    let series = load_series(&args.futures, manifest)?;
    manifest.params = Some(cfg.base);
    let table = calibrate_windows(&series, &cfg).numerical()?;
    print_summary(&table);
    if !table.liquidity.converged {
        eprintln!("note: the optimiser hit its evaluation budget in at least one window");
    }
    out.write_json("calibration.json", &table, manifest)?;
    manifest.settings = json!({ "calibration": cfg });
    Ok(())
}
