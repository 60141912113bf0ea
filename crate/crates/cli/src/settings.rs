//! Merges defaults, the `--config` file and command-line flags.

use std::collections::BTreeSet;
use std::fs;

use anyhow::{anyhow, Context};
use liqopt_core::model::{parse_key_values, PARAM_KEYS};
use liqopt_core::ModelParams;

use crate::args::{GridArgs, ModelArgs};
use crate::error::{Classify, Failure};
use crate::output::GridInfo;

pub const GRID_KEYS: [&str; 5] = ["ns", "nl", "nt", "s_max_mult", "l_max"];

pub struct Settings {
    pub params: ModelParams,
    pub grid: GridInfo,
}

fn set_grid(grid: &mut GridInfo, key: &str, value: f64) -> anyhow::Result<()> {
    let count = |v: f64| -> anyhow::Result<usize> {
        if v >= 0.0 && v.fract() == 0.0 && v < 1e9 {
            Ok(v as usize)
        } else {
            Err(anyhow!("`{key}` must be a non-negative integer (got {v})"))
        }
    };
    match key {
        "ns" => grid.n_s = count(value)?,
        "nl" => grid.n_l = count(value)?,
        "nt" => grid.n_t = count(value)?,
        "s_max_mult" => grid.s_max_mult = value,
        "l_max" => grid.l_max = value,
        other => return Err(anyhow!("unknown grid key `{other}`")),
    }
    Ok(())
}

/// Applies config-file values, then flags. A key given in both places is
/// rejected rather than silently overridden.
pub fn resolve(
    model: &ModelArgs,
    grid_args: &GridArgs,
    base: ModelParams,
    grid: GridInfo,
) -> Result<Settings, Failure> {
    let mut params = base;
    let mut grid = grid;
    let flags: Vec<(&str, f64)> = model.pairs().into_iter().chain(grid_args.pairs()).collect();
    let flag_keys: BTreeSet<&str> = flags.iter().map(|(k, _)| *k).collect();

    if let Some(path) = &model.config {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))
            .input()?;
        let pairs = parse_key_values(&text)
            .with_context(|| format!("in config {}", path.display()))
            .input()?;
        for (key, value) in pairs {
            if flag_keys.contains(key.as_str()) {
                return Err(Failure::Usage(anyhow!(
                    "`{key}` is set both in {} and on the command line",
                    path.display()
                )));
            }
            if GRID_KEYS.contains(&key.as_str()) {
                set_grid(&mut grid, &key, value).input()?;
            } else if PARAM_KEYS.contains(&key.as_str()) {
                params.set(&key, value).input()?;
            } else {
                return Err(Failure::Input(anyhow!(
                    "unknown key `{key}` in config {}",
                    path.display()
                )));
            }
        }
    }
    for (key, value) in flags {
        if GRID_KEYS.contains(&key) {
            set_grid(&mut grid, key, value).usage()?;
        } else {
            params.set(key, value).usage()?;
        }
    }
    let params = params
        .validate()
        .context("invalid model parameters")
        .usage()?;
    Ok(Settings { params, grid })
}

pub fn default_grid() -> GridInfo {
    GridInfo {
        n_s: 100,
        n_l: 100,
        n_t: 1000,
        s_max_mult: 8.0,
        l_max: 5.0,
    }
}
