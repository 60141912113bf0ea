//! Option value surfaces on the grid, exercise boundaries and their
//! CSV/JSON export.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{DataError, PdeError};
use crate::model::Grid;

/// Which party's price is computed. The holder subtracts expected hedging
/// costs, the writer adds them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Holder,
    Writer,
}

/// Sign applied to the transaction-cost term: `+1` holder, `-1` writer.
pub type CostSide = Side;

impl Side {
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Side::Holder => 1.0,
            Side::Writer => -1.0,
        }
    }
}

impl std::str::FromStr for Side {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "holder" => Ok(Side::Holder),
            "writer" => Ok(Side::Writer),
            other => Err(format!("unknown side `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExerciseStyle {
    American,
    European,
}

impl std::str::FromStr for ExerciseStyle {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "american" => Ok(ExerciseStyle::American),
            "european" => Ok(ExerciseStyle::European),
            other => Err(format!("unknown exercise style `{other}`")),
        }
    }
}

/// Option values on one time level, stored row-major as `values[i * n_l + j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSurface {
    pub n_s: usize,
    pub n_l: usize,
    pub values: Vec<f64>,
    pub side: Side,
    pub style: ExerciseStyle,
    pub time_index: usize,
}

impl PriceSurface {
    pub fn from_fn(
        grid: &Grid,
        side: Side,
        style: ExerciseStyle,
        time_index: usize,
        mut f: impl FnMut(f64, f64) -> f64,
    ) -> Self {
        let mut values = Vec::with_capacity(grid.n_s * grid.n_l);
        for &s in &grid.s {
            for &l in &grid.l {
                values.push(f(s, l));
            }
        }
        Self {
            n_s: grid.n_s,
            n_l: grid.n_l,
            values,
            side,
            style,
            time_index,
        }
    }

    /// Put payoff `max(K - s, 0)` on every node.
    pub fn payoff(grid: &Grid, strike: f64, side: Side, style: ExerciseStyle) -> Self {
        Self::from_fn(grid, side, style, 0, |s, _| (strike - s).max(0.0))
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_l + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.n_l + j] = v;
    }

    /// Values along the `S` direction at fixed `j`.
    pub fn s_line(&self, j: usize) -> Vec<f64> {
        (0..self.n_s).map(|i| self.get(i, j)).collect()
    }

    /// Values along the `L` direction at fixed `i`.
    pub fn l_line(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_l..(i + 1) * self.n_l]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Bilinear interpolation at `(s0, l0)`.
    pub fn interpolate(&self, grid: &Grid, s0: f64, l0: f64) -> Result<f64, PdeError> {
        interpolate_price(self, grid, s0, l0)
    }
}

/// Bilinear interpolation on the four nodes enclosing `(s0, l0)`.
pub fn interpolate_price(v: &PriceSurface, g: &Grid, s0: f64, l0: f64) -> Result<f64, PdeError> {
    let eps_s = 1e-12 * g.s_max;
    let eps_l = 1e-12 * g.l_max;
    if !(s0 >= -eps_s && s0 <= g.s_max + eps_s && l0 >= -eps_l && l0 <= g.l_max + eps_l) {
        return Err(PdeError::PointOutsideGrid { s: s0, l: l0 });
    }
    let i = g.s_cell(s0);
    let j = g.l_cell(l0);
    let ws = ((s0 - g.s[i]) / g.ds).clamp(0.0, 1.0);
    let wl = ((l0 - g.l[j]) / g.dl).clamp(0.0, 1.0);
    let v00 = v.get(i, j);
    let v10 = v.get(i + 1, j);
    let v01 = v.get(i, j + 1);
    let v11 = v.get(i + 1, j + 1);
    Ok((1.0 - ws) * ((1.0 - wl) * v00 + wl * v01) + ws * ((1.0 - wl) * v10 + wl * v11))
}

/// Early-exercise boundary `Sf(L_j, tau_n)`, stored per time level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExerciseBoundary {
    pub n_l: usize,
    /// `levels[n][j]`.
    pub levels: Vec<Vec<f64>>,
    /// `flags[n][j]` is set when no node matched the exercise test.
    pub flags: Vec<Vec<bool>>,
}

impl ExerciseBoundary {
    /// Boundary at expiry: `Sf = K` on every liquidity level.
    pub fn at_expiry(n_l: usize, strike: f64) -> Self {
        Self {
            n_l,
            levels: vec![vec![strike; n_l]],
            flags: vec![vec![false; n_l]],
        }
    }

    pub fn push(&mut self, row: BoundaryRow) {
        self.levels.push(row.sf);
        self.flags.push(row.flagged);
    }

    #[inline]
    pub fn at(&self, j: usize, n: usize) -> f64 {
        self.levels[n][j]
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    /// `Sf` at `(l0, tau_n)` by linear interpolation in `L`.
    pub fn interpolate(&self, grid: &Grid, l0: f64, n: usize) -> f64 {
        let j = grid.l_cell(l0.clamp(0.0, grid.l_max));
        let w = ((l0 - grid.l[j]) / grid.dl).clamp(0.0, 1.0);
        (1.0 - w) * self.at(j, n) + w * self.at(j + 1, n)
    }

    pub fn any_flagged(&self) -> bool {
        self.flags.iter().flatten().any(|&f| f)
    }

    pub fn write_csv<W: Write>(&self, grid: &Grid, mut w: W) -> Result<(), DataError> {
        writeln!(w, "L,tau,Sf")?;
        for (n, row) in self.levels.iter().enumerate() {
            for (j, sf) in row.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{}",
                    exact(grid.l[j]),
                    exact(grid.tau[n]),
                    exact(*sf)
                )?;
            }
        }
        Ok(())
    }
}

/// One time level of the exercise boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryRow {
    pub sf: Vec<f64>,
    pub flagged: Vec<bool>,
}

/// 17 significant digits; parses back to the identical `f64`.
pub fn exact(x: f64) -> String {
    format!("{x:.16e}")
}

/// One CSV record of an exported surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceRecord {
    pub s: f64,
    pub l: f64,
    pub tau: f64,
    pub v: f64,
}

pub fn write_surfaces_csv<'a, W: Write>(
    surfaces: impl IntoIterator<Item = &'a PriceSurface>,
    grid: &Grid,
    mut w: W,
) -> Result<(), DataError> {
    writeln!(w, "S,L,tau,V")?;
    for surf in surfaces {
        let tau = grid.tau[surf.time_index];
        for i in 0..surf.n_s {
            for j in 0..surf.n_l {
                writeln!(
                    w,
                    "{},{},{},{}",
                    exact(grid.s[i]),
                    exact(grid.l[j]),
                    exact(tau),
                    exact(surf.get(i, j))
                )?;
            }
        }
    }
    Ok(())
}

pub fn read_surface_csv<R: BufRead>(r: R) -> Result<Vec<SurfaceRecord>, DataError> {
    let mut out = Vec::new();
    let mut lines = r.lines().enumerate();
    match lines.next() {
        Some((_, header)) => {
            let header = header?;
            if header.trim() != "S,L,tau,V" {
                return Err(DataError::BadHeader {
                    found: header,
                    expected: "S,L,tau,V".into(),
                });
            }
        }
        None => return Ok(out),
    }
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| DataError::MalformedRow {
                line: idx + 1,
                message: e.to_string(),
            })?;
        if fields.len() != 4 {
            return Err(DataError::MalformedRow {
                line: idx + 1,
                message: format!("expected 4 fields, got {}", fields.len()),
            });
        }
        out.push(SurfaceRecord {
            s: fields[0],
            l: fields[1],
            tau: fields[2],
            v: fields[3],
        });
    }
    Ok(out)
}

/// JSON export layout for a set of surfaces on one grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceExport {
    pub s: Vec<f64>,
    pub l: Vec<f64>,
    pub tau: Vec<f64>,
    pub surfaces: Vec<PriceSurface>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<ExerciseBoundary>,
}

impl SurfaceExport {
    pub fn new(
        grid: &Grid,
        surfaces: Vec<PriceSurface>,
        boundary: Option<ExerciseBoundary>,
    ) -> Self {
        Self {
            s: grid.s.clone(),
            l: grid.l.clone(),
            tau: grid.tau.clone(),
            surfaces,
            boundary,
        }
    }

    pub fn to_json(&self) -> Result<String, DataError> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, DataError> {
        Ok(serde_json::from_str(text)?)
    }
}
