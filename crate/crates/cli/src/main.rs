#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod error;
mod output;
mod settings;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::json;

use args::{Cli, Command};
use error::{Classify, Failure};
use output::{Manifest, OutDir};

fn name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Price(_) => "price",
        Command::Converge(_) => "converge",
        Command::Compare(_) => "compare",
        Command::Sweep(_) => "sweep",
        Command::Calibrate(_) => "calibrate",
        Command::Evaluate(_) => "evaluate",
        Command::GenFixtures(_) => "gen-fixtures",
    }
}

fn run(cli: &Cli, out: &OutDir, manifest: &mut Manifest) -> Result<(), Failure> {
    match &cli.command {
        Command::Price(a) => commands::price::run(a, out, manifest),
        Command::Converge(a) => commands::converge::run(a, out, manifest),
        Command::Compare(a) => commands::compare::run(a, out, manifest),
        Command::Sweep(a) => commands::sweep::run(a, out, manifest),
        Command::Calibrate(a) => commands::calibrate::run(a, out, manifest),
        Command::Evaluate(a) => commands::evaluate::run(a, out, manifest),
        Command::GenFixtures(a) => commands::fixtures::run(a, out, manifest),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(jobs) = cli.jobs {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .usage();
        if let Err(e) = pool {
            eprintln!("error: {e}");
            return ExitCode::from(e.code());
        }
    }

    let started = Instant::now();
    let command = name(&cli.command);
    let mut manifest = Manifest::new(command);
    let result = OutDir::create(&cli.out_dir).and_then(|out| {
        let r = run(&cli, &out, &mut manifest);
        manifest.wall_time_secs = started.elapsed().as_secs_f64();
        if let Err(f) = &r {
            if f.code() == 3 {
                let diag = json!({
                    "command": command,
                    "error": format!("{:#}", f.error()),
                    "causes": f.error().chain().map(|c| c.to_string()).collect::<Vec<_>>(),
                    "params": manifest.params,
                    "grid": manifest.grid,
                    "settings": manifest.settings,
                });
                let text = serde_json::to_string_pretty(&diag).unwrap_or_default();
                eprintln!("{text}");
                let _ = std::fs::write(out.path("diagnostic.json"), text);
            }
            return r;
        }
        out.finish(&manifest)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
