use liqopt_core::model::PARAM_KEYS;
use liqopt_core::{build_grid, price_both, AdiOptions, ModelParams};
use rayon::prelude::*;
use serde_json::json;

use crate::args::SweepArgs;
use crate::error::{Classify, Failure};
use crate::output::{sig6, Csv, Manifest, OutDir};
use crate::settings::{default_grid, resolve};

/// Per value: final-level boundary over `L` and price curves over `S` at `l0`.
type Curves = (Vec<(f64, f64)>, Vec<(f64, f64, f64)>);

pub fn run(args: &SweepArgs, out: &OutDir, manifest: &mut Manifest) -> Result<(), Failure> {
    if !PARAM_KEYS.contains(&args.param.as_str()) {
        return Err(Failure::Usage(anyhow::anyhow!(
            "unknown parameter `{}`",
            args.param
        )));
    }
    let s = resolve(
        &args.model,
        &args.grid,
        ModelParams::default(),
        default_grid(),
    )?;
    let base = s.params;
    let variants: Vec<ModelParams> = args
        .values
        .iter()
        .map(|&v| {
            let mut p = base;
            p.set(&args.param, v)?;
            p.validate()
        })
        .collect::<Result<_, _>>()
        .usage()?;
    manifest.params = Some(base);
    manifest.grid = Some(s.grid);

    let curves: Vec<Curves> = variants
        .par_iter()
        .map(|p| -> anyhow::Result<Curves> {
            let g = build_grid(s.grid.n_s, s.grid.n_l, s.grid.n_t, p, s.grid.spec())?;
            let (h, w) = price_both(p, &g, &AdiOptions::default())?;
            let boundary = h
                .boundary
                .as_ref()
                .map(|b| {
                    let last = &b.levels[b.n_levels() - 1];
                    g.l.iter().copied().zip(last.iter().copied()).collect()
                })
                .unwrap_or_default();
            let l0 = args.l0.clamp(0.0, g.l_max);
            let prices =
                g.s.iter()
                    .filter(|&&x| x <= 2.0 * p.strike)
                    .map(|&x| Ok((x, h.price_at(x, l0)?, w.price_at(x, l0)?)))
                    .collect::<anyhow::Result<_>>()?;
            Ok((boundary, prices))
        })
        .collect::<anyhow::Result<_>>()
        .numerical()?;

    let mut bcsv = Csv::new(&[&args.param, "L", "Sf"]);
    let mut pcsv = Csv::new(&[&args.param, "S", "holder", "writer"]);
    for (v, (boundary, prices)) in args.values.iter().zip(&curves) {
        for (l, sf) in boundary {
            bcsv.row([sig6(*v), sig6(*l), sig6(*sf)]);
        }
        for (x, h, w) in prices {
            pcsv.row([sig6(*v), sig6(*x), sig6(*h), sig6(*w)]);
        }
    }
    out.write("sweep_boundary.csv", bcsv.as_bytes(), manifest)?;
    out.write("sweep_price.csv", pcsv.as_bytes(), manifest)?;
    println!(
        "{}: {} values, boundary and price curves written to {}",
        args.param,
        args.values.len(),
        out.root.display()
    );
    manifest.settings = json!({ "param": args.param, "values": args.values, "l0": args.l0 });
    Ok(())
}
