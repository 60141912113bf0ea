use liqopt_core::{
    build_grid, price_both, price_european_mc, price_explicit_both, AdiOptions, ExerciseStyle,
    ExplicitOptions, McOptions, ModelParams,
};
use serde_json::json;

use crate::args::CompareArgs;
use crate::commands::price::style;
use crate::error::{Classify, Failure};
use crate::output::{opt6, sig6, Csv, Manifest, OutDir};
use crate::settings::{default_grid, resolve};

fn rel(a: f64, b: Option<f64>) -> Option<f64> {
    b.map(|b| (a - b).abs() / b.abs())
}

pub fn run(args: &CompareArgs, out: &OutDir, manifest: &mut Manifest) -> Result<(), Failure> {
    let s = resolve(
        &args.model,
        &args.grid,
        ModelParams::default(),
        default_grid(),
    )?;
    let p = s.params;
    let style = style(args.style);
    let g = build_grid(s.grid.n_s, s.grid.n_l, s.grid.n_t, &p, s.grid.spec()).usage()?;
    manifest.params = Some(p);
    manifest.grid = Some(s.grid);
    manifest.seed = Some(args.seed);

    let adi_opts = AdiOptions {
        style,
        ..AdiOptions::default()
    };
    let (adi_h, adi_w) = price_both(&p, &g, &adi_opts).numerical()?;
    let explicit = if args.no_explicit {
        None
    } else {
        let ge = build_grid(s.grid.n_s, s.grid.n_l, args.explicit_nt, &p, s.grid.spec()).usage()?;
        let opts = ExplicitOptions {
            style,
            ..ExplicitOptions::default()
        };
        Some(price_explicit_both(&p, &ge, &opts).numerical()?)
    };
    let with_mc = style == ExerciseStyle::European && p.kappa == 0.0 && args.paths > 0;
    if style == ExerciseStyle::European && !with_mc {
        eprintln!("note: Monte Carlo column needs --kappa 0; skipped");
    }
    let mc_opts = McOptions {
        n_paths: args.paths,
        n_steps: args.mc_steps,
        seed: args.seed,
        ..McOptions::default()
    };

    let mut csv = match style {
        ExerciseStyle::American => Csv::new(&[
            "s0",
            "adi_holder",
            "explicit_holder",
            "rel_diff_holder",
            "adi_writer",
            "explicit_writer",
            "rel_diff_writer",
        ]),
        ExerciseStyle::European => Csv::new(&[
            "s0",
            "adi",
            "explicit",
            "mc",
            "mc_stderr",
            "rel_diff_explicit",
            "rel_diff_mc",
        ]),
    };
    for &s0 in &args.s0 {
        let ah = adi_h.price_at(s0, args.l0).numerical()?;
        let aw = adi_w.price_at(s0, args.l0).numerical()?;
        let (eh, ew) = match &explicit {
            Some((h, w)) => (
                Some(h.price_at(s0, args.l0).numerical()?),
                Some(w.price_at(s0, args.l0).numerical()?),
            ),
            None => (None, None),
        };
        match style {
            ExerciseStyle::American => csv.row([
                sig6(s0),
                sig6(ah),
                opt6(eh),
                opt6(rel(ah, eh)),
                sig6(aw),
                opt6(ew),
                opt6(rel(aw, ew)),
            ]),
            ExerciseStyle::European => {
                let mc = if with_mc {
                    Some(price_european_mc(&p, s0, args.l0, &mc_opts).numerical()?)
                } else {
                    None
                };
                csv.row([
                    sig6(s0),
                    sig6(ah),
                    opt6(eh),
                    opt6(mc.map(|m| m.price)),
                    opt6(mc.map(|m| m.stderr)),
                    opt6(rel(ah, eh)),
                    opt6(rel(ah, mc.map(|m| m.price))),
                ])
            }
        }
    }
    print!("{}", csv.as_str());
    out.write("compare.csv", csv.as_bytes(), manifest)?;
    manifest.settings = json!({
        "style": format!("{:?}", args.style).to_lowercase(),
        "s0": args.s0,
        "l0": args.l0,
        "explicit_nt": (!args.no_explicit).then_some(args.explicit_nt),
        "mc_paths": with_mc.then_some(args.paths),
        "mc_steps": with_mc.then_some(args.mc_steps),
    });
    Ok(())
}
