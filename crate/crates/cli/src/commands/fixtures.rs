use liqopt_core::data::{write_futures_csv, write_options_csv};
use liqopt_core::synthetic::{generate_fixtures, FixtureConfig};
use serde_json::json;

use crate::args::FixtureArgs;
use crate::error::{Classify, Failure};
use crate::output::{Manifest, OutDir};

pub fn run(args: &FixtureArgs, out: &OutDir, manifest: &mut Manifest) -> Result<(), Failure> {
    if args.days < 3 || args.quote_days > args.days || !(args.noise >= 0.0) {
        return Err(Failure::Usage(anyhow::anyhow!(
            "need --days >= 3, --quote-days <= --days and a non-negative --noise"
        )));
    }
    let cfg = FixtureConfig {
        seed: args.seed,
        n_days: args.days,
        quote_days: args.quote_days,
        noise: args.noise,
        ..FixtureConfig::default()
    };
    let fx = generate_fixtures(&cfg).numerical()?;
    let mut buf = Vec::new();
    write_futures_csv(&fx.futures, &mut buf).numerical()?;
    out.write("futures.csv", &buf, manifest)?;
    let mut buf = Vec::new();
    write_options_csv(&fx.options, &mut buf).numerical()?;
    out.write("options.csv", &buf, manifest)?;
    out.write_json(
        "truth.json",
        &json!({ "config": cfg, "liquidity": fx.liquidity }),
        manifest,
    )?;
    manifest.params = Some(cfg.params);
    manifest.seed = Some(cfg.seed);
    manifest.settings = json!({ "fixtures": cfg });
    println!(
        "{} closes, {} option quotes written to {}",
        fx.futures.len(),
        fx.options.len(),
        out.root.display()
    );
    Ok(())
}
