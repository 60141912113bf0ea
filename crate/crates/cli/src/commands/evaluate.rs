use std::fs;

use anyhow::Context;
use liqopt_core::calibration::evaluate::{
    calibrate_windows, evaluate_quotes, CalibrationSummary, EvalGrid, FittedModels,
};
use liqopt_core::load_options_csv;
use liqopt_core::GridSpec;
use serde_json::json;

use crate::args::EvaluateArgs;
use crate::commands::calibrate::{config, load_series, print_summary};
use crate::error::{Classify, Failure};
use crate::output::{opt6, sig6, Csv, GridInfo, Manifest, OutDir};

pub fn run(args: &EvaluateArgs, out: &OutDir, manifest: &mut Manifest) -> Result<(), Failure> {
    let cfg = config(&args.windows, &args.model)?;
    let defaults = EvalGrid::default();
    let mut grid = GridInfo {
        n_s: args.grid.ns.unwrap_or(defaults.n_s),
        n_l: args.grid.nl.unwrap_or(defaults.n_l),
        n_t: args.grid.nt.unwrap_or(defaults.min_steps + 1),
        s_max_mult: args.grid.s_max_mult.unwrap_or(defaults.spec.s_max_mult),
        l_max: args.grid.l_max.unwrap_or(defaults.spec.l_max),
    };
    if grid.n_s < 4 || grid.n_l < 4 || grid.n_t < 2 {
        return Err(Failure::Usage(anyhow::anyhow!(
            "grid too small: need ns >= 4, nl >= 4, nt >= 2"
        )));
    }
    let eval_grid = EvalGrid {
        n_s: grid.n_s,
        n_l: grid.n_l,
        min_steps: grid.n_t - 1,
        spec: GridSpec {
            s_max_mult: grid.s_max_mult,
            l_max: grid.l_max,
        },
        ..defaults
    };
    grid.n_t = eval_grid.min_steps + 1;

    let series = load_series(&args.futures, manifest)?;
    manifest.inputs.push(args.options.clone());
    let quotes = load_options_csv(&args.options, args.min_volume)
        .with_context(|| format!("cannot load options from {}", args.options.display()))
        .input()?;

    let calibration = match &args.calibration {
        Some(path) => {
            manifest.inputs.push(path.clone());
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))
                .input()?;
            serde_json::from_str::<CalibrationSummary>(&text)
                .with_context(|| format!("{} is not a calibration result", path.display()))
                .input()?
        }
        None => {
            let t = calibrate_windows(&series, &cfg).numerical()?;
            print_summary(&t);
            out.write_json("calibration.json", &t, manifest)?;
            t
        }
    };
    let fitted = FittedModels::from_summary(&calibration, &cfg.base);
    fitted
        .liquidity
        .validate()
        .context("fitted liquidity parameters")
        .input()?;
    manifest.params = Some(fitted.liquidity);
    manifest.grid = Some(grid);

    let eval = evaluate_quotes(&series, &quotes, &fitted, cfg.ssm, &eval_grid).numerical()?;

    let mut csv = Csv::new(&["bucket", "n_quotes", "rmse_gbm", "rmse_liquidity"]);
    for row in &eval.by_bucket {
        csv.row([
            row.bucket.clone(),
            row.n_quotes.to_string(),
            opt6(row.rmse_gbm),
            opt6(row.rmse_liquidity),
        ]);
    }
    print!("{}", csv.as_str());
    out.write("rmse.csv", csv.as_bytes(), manifest)?;
    out.write_json("rmse.json", &eval.by_bucket, manifest)?;

    let mut qcsv = Csv::new(&[
        "date",
        "strike",
        "expiry",
        "maturity",
        "underlying",
        "l_hat",
        "market",
        "gbm",
        "liquidity",
        "bucket",
    ]);
    for q in &eval.quotes {
        qcsv.row([
            q.date.to_string(),
            sig6(q.strike),
            q.expiry.to_string(),
            sig6(q.maturity),
            sig6(q.underlying),
            sig6(q.l_hat),
            sig6(q.market),
            sig6(q.gbm),
            sig6(q.liquidity),
            q.bucket.label().to_string(),
        ]);
    }
    out.write("quotes.csv", qcsv.as_bytes(), manifest)?;
    manifest.settings = json!({
        "calibration": cfg,
        "eval_grid": eval_grid,
        "min_volume": args.min_volume,
        "fitted": fitted,
        "n_quotes": quotes.len(),
    });
    Ok(())
}
