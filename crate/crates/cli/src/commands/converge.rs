use liqopt_core::convergence::{adi_ladder, eoc_table, explicit_ladder, Direction};
use liqopt_core::{AdiOptions, ExplicitOptions, ModelParams};
use serde_json::json;

use crate::args::{ConvergeArgs, DirectionArg, SchemeArg, SideArg};
use crate::error::{Classify, Failure};
use crate::output::{opt6, sig6, Csv, Manifest, OutDir};
use crate::settings::{default_grid, resolve};

pub fn run(args: &ConvergeArgs, out: &OutDir, manifest: &mut Manifest) -> Result<(), Failure> {
    let s = resolve(
        &args.model,
        &args.grid,
        ModelParams::default(),
        default_grid(),
    )?;
    let p = s.params;
    let mut counts = args.counts.clone();
    counts.sort_unstable();
    counts.dedup();
    if counts.len() < 2 {
        return Err(Failure::Usage(anyhow::anyhow!(
            "--counts needs at least two distinct values"
        )));
    }
    let direction = match args.direction {
        DirectionArg::Tau => Direction::Tau,
        DirectionArg::S => Direction::S,
        DirectionArg::L => Direction::L,
    };
    let base = (s.grid.n_s, s.grid.n_l, s.grid.n_t);
    manifest.params = Some(p);
    manifest.grid = Some(s.grid);

    let points = match args.scheme {
        SchemeArg::Adi => adi_ladder(
            &p,
            args.s0,
            args.l0,
            base,
            s.grid.spec(),
            direction,
            &counts,
            &AdiOptions::default(),
        ),
        SchemeArg::Explicit => explicit_ladder(
            &p,
            args.s0,
            args.l0,
            base,
            s.grid.spec(),
            direction,
            &counts,
            &ExplicitOptions::default(),
        ),
    }
    .numerical()?;

    let steps: Vec<usize> = points.iter().map(|q| q.steps).collect();
    let mut sides = Vec::new();
    if args.side != SideArg::Writer {
        sides.push((
            "holder",
            points.iter().map(|q| q.holder).collect::<Vec<_>>(),
        ));
    }
    if args.side != SideArg::Holder {
        sides.push((
            "writer",
            points.iter().map(|q| q.writer).collect::<Vec<_>>(),
        ));
    }
    let mut summary = serde_json::Map::new();
    for (name, values) in sides {
        let rows = eoc_table(&steps, &values);
        let mut csv = Csv::new(&["steps", "value", "difference", "EOC"]);
        println!("{name}");
        println!(
            "{:>10} {:>14} {:>14} {:>10} {:>10}",
            "steps", "value", "difference", "EOC", "order"
        );
        for r in &rows {
            csv.row([
                r.steps.to_string(),
                sig6(r.value),
                opt6(r.difference),
                opt6(r.eoc),
            ]);
            println!(
                "{:>10} {:>14} {:>14} {:>10} {:>10}",
                r.steps,
                sig6(r.value),
                opt6(r.difference),
                opt6(r.eoc),
                opt6(r.observed_order)
            );
        }
        out.write(&format!("converge_{name}.csv"), csv.as_bytes(), manifest)?;
        summary.insert(name.to_string(), serde_json::to_value(&rows).numerical()?);
    }
    manifest.settings = json!({
        "direction": format!("{:?}", args.direction).to_lowercase(),
        "scheme": format!("{:?}", args.scheme).to_lowercase(),
        "counts": counts,
        "s0": args.s0,
        "l0": args.l0,
        "ladder": summary,
    });
    Ok(())
}
