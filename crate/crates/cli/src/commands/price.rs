use liqopt_core::adi::price_writer_european;
use liqopt_core::surface::write_surfaces_csv;
use liqopt_core::{
    build_grid, price_holder, price_writer, AdiOptions, BoundaryLag, ExerciseStyle, ModelParams,
    PricingResult,
};
use serde_json::json;

use crate::args::{LagArg, PriceArgs, SideArg, StyleArg};
use crate::error::{Classify, Failure};
use crate::output::{sig6, Csv, Manifest, OutDir};
use crate::settings::{default_grid, resolve};

pub fn style(s: StyleArg) -> ExerciseStyle {
    match s {
        StyleArg::American => ExerciseStyle::American,
        StyleArg::European => ExerciseStyle::European,
    }
}

pub fn run(args: &PriceArgs, out: &OutDir, manifest: &mut Manifest) -> Result<(), Failure> {
    let s = resolve(
        &args.model,
        &args.grid,
        ModelParams::default(),
        default_grid(),
    )?;
    let p = s.params;
    let g = build_grid(s.grid.n_s, s.grid.n_l, s.grid.n_t, &p, s.grid.spec()).usage()?;
    let opts = AdiOptions {
        style: style(args.style),
        retain_all: args.surface,
        writer_boundary_lag: match args.writer_lag {
            LagArg::Previous => BoundaryLag::Previous,
            LagArg::Current => BoundaryLag::Current,
        },
        ..AdiOptions::default()
    };
    manifest.params = Some(p);
    manifest.grid = Some(s.grid);
    manifest.settings = json!({
        "side": format!("{:?}", args.side).to_lowercase(),
        "style": format!("{:?}", args.style).to_lowercase(),
        "s0": args.s0,
        "l0": args.l0,
        "writer_lag": format!("{:?}", args.writer_lag).to_lowercase(),
    });

    // the writer needs the holder's boundary even when only the writer is requested
    let holder = price_holder(&p, &g, &opts).numerical()?;
    let writer = match args.side {
        SideArg::Holder => None,
        _ => Some(match (&holder.boundary, opts.style) {
            (Some(b), ExerciseStyle::American) => price_writer(&p, &g, b, &opts).numerical()?,
            _ => price_writer_european(&p, &g, &opts).numerical()?,
        }),
    };
    let mut results: Vec<(&str, &PricingResult)> = Vec::new();
    if args.side != SideArg::Writer {
        results.push(("holder", &holder));
    }
    if let Some(w) = &writer {
        results.push(("writer", w));
    }

    let mut csv = Csv::new(&["side", "style", "s0", "l0", "price"]);
    let mut diagnostics = serde_json::Map::new();
    for (name, res) in &results {
        if res.diagnostics.degenerate_row_cfl > 1.0 {
            eprintln!(
                "warning: {name}: L = 0 row stability ratio {:.3} exceeds 1; raise --nt",
                res.diagnostics.degenerate_row_cfl
            );
        }
        let v = res.price_at(args.s0, args.l0).numerical()?;
        csv.row([
            name.to_string(),
            format!("{:?}", args.style).to_lowercase(),
            sig6(args.s0),
            sig6(args.l0),
            sig6(v),
        ]);
        diagnostics.insert(
            name.to_string(),
            json!({
                "price": v,
                "wall_time_secs": res.diagnostics.wall_time_secs,
                "flagged_boundary_nodes": res.diagnostics.flagged_boundary_nodes,
                "degenerate_row_cfl": res.diagnostics.degenerate_row_cfl,
            }),
        );
        if args.surface {
            let mut buf = Vec::new();
            write_surfaces_csv(&res.surfaces, &g, &mut buf).numerical()?;
            out.write(&format!("surface_{name}.csv"), &buf, manifest)?;
        }
    }
    if args.boundary {
        if let Some(b) = &holder.boundary {
            let mut buf = Vec::new();
            b.write_csv(&g, &mut buf).numerical()?;
            out.write("boundary.csv", &buf, manifest)?;
        }
    }
    print!("{}", csv.as_str());
    out.write("price.csv", csv.as_bytes(), manifest)?;
    if let serde_json::Value::Object(m) = &mut manifest.settings {
        m.insert("diagnostics".into(), serde_json::Value::Object(diagnostics));
    }
    Ok(())
}
