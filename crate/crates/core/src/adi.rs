//! Douglas-Rachford ADI time marching for the holder and writer prices.
//!
//! Each step from `tau_n` to `tau_{n+1}`:
//!
//! 1. advance the `L = 0` row explicitly with the reduced operator and set
//!    the Dirichlet edges (`V = K` at `S = 0`, `V = 0` at `S = s_max`);
//! 2. solve one tridiagonal system per interior `L` line, implicit in `S`,
//!    with the cross derivative and the cost term explicit;
//! 3. solve one tridiagonal system per interior `S` line, implicit in `L`,
//!    with `dV/dL = 0` eliminated at `L = l_max`;
//! 4. apply the early-exercise rule: projection onto the payoff for the
//!    holder, payoff overwrite inside the holder's exercise region for the
//!    writer.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::PdeError;
use crate::model::{Grid, ModelParams};
use crate::operators::{assemble_l_sweep, assemble_s_sweep, degenerate_l_row, UpperLiquidityEdge};
use crate::surface::{BoundaryRow, ExerciseBoundary, ExerciseStyle, PriceSurface, Side};
use crate::tridiag::solve_in_place;

/// Which holder boundary level the writer uses when stepping to `tau_{n+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryLag {
    /// `Sf(L_j, tau_n)`.
    Previous,
    /// `Sf(L_j, tau_{n+1})`.
    Current,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractOptions {
    pub tol: f64,
    /// Place `Sf` between nodes by extrapolating the gap `V - payoff`.
    pub refine: bool,
    /// Fall back to a `0.5 dS (1 + |dV/dS|)` proximity test when no node matches.
    pub relaxed: bool,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            refine: false,
            relaxed: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiOptions {
    /// Implicitness weight; `0.5` is Crank-Nicolson in each direction.
    pub eta: f64,
    pub style: ExerciseStyle,
    /// Keep every time level instead of only the last one.
    pub retain_all: bool,
    pub writer_boundary_lag: BoundaryLag,
    pub extract: ExtractOptions,
}

impl Default for AdiOptions {
    fn default() -> Self {
        Self {
            eta: 0.5,
            style: ExerciseStyle::American,
            retain_all: false,
            writer_boundary_lag: BoundaryLag::Previous,
            extract: ExtractOptions::default(),
        }
    }
}

impl AdiOptions {
    pub fn european() -> Self {
        Self {
            style: ExerciseStyle::European,
            ..Self::default()
        }
    }
}

/// Early-exercise rule applied at the end of a step.
#[derive(Debug, Clone, Copy)]
pub enum Exercise<'a> {
    None,
    /// `V <- max(V, payoff)` everywhere.
    Project,
    /// `V <- payoff` wherever `S_i <= sf[j]`.
    Region(&'a [f64]),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `max |V^{n+1} - V^n|` per step.
    pub step_changes: Vec<f64>,
    pub wall_time_secs: f64,
    /// Number of `(level, j)` pairs where the boundary test found no node.
    pub flagged_boundary_nodes: usize,
    /// `dtau` times the largest diagonal rate of the explicit `L = 0` row.
    /// Values above one mean that row is outside its explicit stability range.
    pub degenerate_row_cfl: f64,
    /// One-sided `dV/dS` just above `Sf` on the final level, per `L` node.
    pub smooth_pasting: Vec<f64>,
}

/// Output of a full time march.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricingResult {
    pub side: Side,
    pub style: ExerciseStyle,
    pub grid: Grid,
    pub params: ModelParams,
    /// Retained levels, oldest first; the last entry is `tau = T`.
    pub surfaces: Vec<PriceSurface>,
    pub boundary: Option<ExerciseBoundary>,
    pub diagnostics: Diagnostics,
}

impl PricingResult {
    pub fn final_surface(&self) -> &PriceSurface {
        self.surfaces
            .last()
            .expect("at least one surface is retained")
    }

    /// `V(s0, l0, tau = T)` by bilinear interpolation.
    pub fn price_at(&self, s0: f64, l0: f64) -> Result<f64, PdeError> {
        self.final_surface().interpolate(&self.grid, s0, l0)
    }
}

fn degenerate_row_cfl(g: &Grid, p: &ModelParams) -> f64 {
    let i = (g.n_s - 2) as f64;
    let s_rate = p.sigma_s * p.sigma_s * i * i;
    let l_rate = 2.5 * p.sigma_l * p.sigma_l / (g.dl * g.dl);
    g.dtau * (s_rate + l_rate + p.r)
}

/// Advances `v_n` by one time step.
pub fn adi_step(
    v_n: &PriceSurface,
    g: &Grid,
    p: &ModelParams,
    side: Side,
    eta: f64,
    exercise: Exercise<'_>,
) -> Result<PriceSurface, PdeError> {
    let (n_s, n_l) = (g.n_s, g.n_l);
    let strike = p.strike;

    let row0: Vec<f64> = (0..n_s)
        .map(|i| match i {
            0 => Ok(strike),
            _ if i == n_s - 1 => Ok(0.0),
            _ => degenerate_l_row(v_n, i, g, p, side),
        })
        .collect::<Result<_, _>>()?;

    // First sub-step: implicit in S along every interior L line.
    let s_lines: Vec<Vec<f64>> = (1..n_l - 1)
        .into_par_iter()
        .map(|j| {
            let mut sys = assemble_s_sweep(v_n, j, g, p, side, eta, [strike, 0.0])?;
            let mut scratch = vec![0.0; sys.rhs.len()];
            solve_in_place(
                &sys.lower,
                &sys.diag,
                &sys.upper,
                &mut sys.rhs,
                &mut scratch,
            )?;
            Ok(sys.rhs)
        })
        .collect::<Result<_, PdeError>>()?;

    let mut half = v_n.clone();
    for (i, &v) in row0.iter().enumerate() {
        half.set(i, 0, v);
    }
    for (k, line) in s_lines.iter().enumerate() {
        let j = k + 1;
        half.set(0, j, strike);
        half.set(n_s - 1, j, 0.0);
        for (m, &x) in line.iter().enumerate() {
            half.set(m + 1, j, x);
        }
    }
    for i in 0..n_s {
        let top = half.get(i, n_l - 2);
        half.set(i, n_l - 1, top);
    }

    // Second sub-step: implicit in L along every interior S line.
    let l_lines: Vec<Vec<f64>> = (1..n_s - 1)
        .into_par_iter()
        .map(|i| {
            let mut sys = assemble_l_sweep(
                &half,
                v_n,
                i,
                g,
                p,
                eta,
                row0[i],
                UpperLiquidityEdge::Neumann,
            )?;
            let mut scratch = vec![0.0; sys.rhs.len()];
            solve_in_place(
                &sys.lower,
                &sys.diag,
                &sys.upper,
                &mut sys.rhs,
                &mut scratch,
            )?;
            Ok(sys.rhs)
        })
        .collect::<Result<_, PdeError>>()?;

    let mut next = PriceSurface {
        n_s,
        n_l,
        values: vec![0.0; n_s * n_l],
        side,
        style: v_n.style,
        time_index: v_n.time_index + 1,
    };
    for j in 0..n_l {
        next.set(0, j, strike);
        next.set(n_s - 1, j, 0.0);
    }
    for (k, line) in l_lines.iter().enumerate() {
        let i = k + 1;
        next.set(i, 0, row0[i]);
        for (m, &x) in line.iter().enumerate() {
            next.set(i, m + 1, x);
        }
        next.set(i, n_l - 1, line[line.len() - 1]);
    }

    apply_exercise(&mut next, g, strike, exercise);
    Ok(next)
}

pub(crate) fn apply_exercise(v: &mut PriceSurface, g: &Grid, strike: f64, exercise: Exercise<'_>) {
    match exercise {
        Exercise::None => {}
        Exercise::Project => {
            for i in 0..g.n_s {
                let payoff = (strike - g.s[i]).max(0.0);
                for j in 0..g.n_l {
                    if v.get(i, j) < payoff {
                        v.set(i, j, payoff);
                    }
                }
            }
        }
        Exercise::Region(sf) => {
            for i in 0..g.n_s {
                let payoff = (strike - g.s[i]).max(0.0);
                for (j, &b) in sf.iter().enumerate() {
                    if g.s[i] <= b {
                        v.set(i, j, payoff);
                    }
                }
            }
        }
    }
}

/// Largest node `S_i` (with `i >= 1`) where the value equals the intrinsic
/// value to within `tol`, for each liquidity level.
pub fn extract_boundary(
    v: &PriceSurface,
    g: &Grid,
    strike: f64,
    opts: ExtractOptions,
) -> BoundaryRow {
    let mut sf = Vec::with_capacity(g.n_l);
    let mut flagged = Vec::with_capacity(g.n_l);
    for j in 0..g.n_l {
        let gap = |i: usize| v.get(i, j) - (strike - g.s[i]);
        let strict = (1..g.n_s).rev().find(|&i| gap(i).abs() < opts.tol);
        let found = strict.or_else(|| {
            if !opts.relaxed {
                return None;
            }
            (1..g.n_s - 1).rev().find(|&i| {
                let slope = (v.get(i + 1, j) - v.get(i - 1, j)) / (2.0 * g.ds);
                gap(i).abs() < 0.5 * g.ds * (1.0 + slope.abs())
            })
        });
        match found {
            Some(i) => {
                let mut s = g.s[i];
                if opts.refine && i + 2 < g.n_s {
                    let (g1, g2) = (gap(i + 1), gap(i + 2));
                    if g2 > g1 && g1 > 0.0 {
                        let root = g.s[i + 1] - g1 * g.ds / (g2 - g1);
                        s = root.clamp(g.s[i], g.s[i + 1]);
                    }
                }
                sf.push(s.min(strike));
                flagged.push(false);
            }
            None => {
                sf.push(0.0);
                flagged.push(true);
            }
        }
    }
    BoundaryRow { sf, flagged }
}

fn smooth_pasting(v: &PriceSurface, g: &Grid, row: &[f64]) -> Vec<f64> {
    row.iter()
        .enumerate()
        .map(|(j, &sf)| {
            let i = g.s_cell(sf).min(g.n_s - 2);
            (v.get(i + 1, j) - v.get(i, j)) / g.ds
        })
        .collect()
}

fn check_stability(v: &PriceSurface, strike: f64) -> Result<(), PdeError> {
    let m = v.values.iter().fold(0.0f64, |m, x| {
        if x.is_nan() {
            f64::INFINITY
        } else {
            m.max(x.abs())
        }
    });
    if m > 10.0 * strike {
        return Err(PdeError::InstabilityDetected {
            level: v.time_index,
            magnitude: m,
        });
    }
    Ok(())
}

fn max_change(a: &PriceSurface, b: &PriceSurface) -> f64 {
    a.values
        .iter()
        .zip(&b.values)
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Holder price: projection onto the payoff after every step and the
/// exercise boundary extracted from each new level. European style skips
/// the projection and returns no boundary.
pub fn price_holder(
    p: &ModelParams,
    g: &Grid,
    opts: &AdiOptions,
) -> Result<PricingResult, PdeError> {
    march(p, g, opts, Side::Holder, None)
}

/// Writer price on the exercise region fixed by a holder run on the same grid.
pub fn price_writer(
    p: &ModelParams,
    g: &Grid,
    boundary: &ExerciseBoundary,
    opts: &AdiOptions,
) -> Result<PricingResult, PdeError> {
    if opts.style == ExerciseStyle::American && boundary.n_levels() != g.n_t {
        return Err(PdeError::BoundaryMismatch {
            expected: g.n_t,
            got: boundary.n_levels(),
        });
    }
    march(p, g, opts, Side::Writer, Some(boundary))
}

/// European-style writer run, which needs no boundary.
pub fn price_writer_european(
    p: &ModelParams,
    g: &Grid,
    opts: &AdiOptions,
) -> Result<PricingResult, PdeError> {
    let opts = AdiOptions {
        style: ExerciseStyle::European,
        ..*opts
    };
    march(p, g, &opts, Side::Writer, None)
}

/// Holder run followed by the writer run on its boundary.
pub fn price_both(
    p: &ModelParams,
    g: &Grid,
    opts: &AdiOptions,
) -> Result<(PricingResult, PricingResult), PdeError> {
    let holder = price_holder(p, g, opts)?;
    let writer = match (&holder.boundary, opts.style) {
        (Some(b), ExerciseStyle::American) => price_writer(p, g, b, opts)?,
        _ => price_writer_european(p, g, opts)?,
    };
    Ok((holder, writer))
}

fn march(
    p: &ModelParams,
    g: &Grid,
    opts: &AdiOptions,
    side: Side,
    holder_boundary: Option<&ExerciseBoundary>,
) -> Result<PricingResult, PdeError> {
    let p = p.validate()?;
    let started = Instant::now();
    let american = opts.style == ExerciseStyle::American;
    let mut v = PriceSurface::payoff(g, p.strike, side, opts.style);
    let mut retained = Vec::new();
    if opts.retain_all {
        retained.push(v.clone());
    }
    let mut own_boundary =
        (american && side == Side::Holder).then(|| ExerciseBoundary::at_expiry(g.n_l, p.strike));
    let mut diagnostics = Diagnostics {
        degenerate_row_cfl: degenerate_row_cfl(g, &p),
        step_changes: Vec::with_capacity(g.n_t - 1),
        ..Diagnostics::default()
    };

    for n in 0..g.n_t - 1 {
        let exercise = match (american, side, holder_boundary) {
            (false, _, _) => Exercise::None,
            (true, Side::Holder, _) => Exercise::Project,
            (true, Side::Writer, Some(b)) => {
                let level = match opts.writer_boundary_lag {
                    BoundaryLag::Previous => n,
                    BoundaryLag::Current => n + 1,
                };
                Exercise::Region(&b.levels[level])
            }
            (true, Side::Writer, None) => Exercise::None,
        };
        let next = adi_step(&v, g, &p, side, opts.eta, exercise)?;
        check_stability(&next, p.strike)?;
        diagnostics.step_changes.push(max_change(&v, &next));
        if let Some(b) = own_boundary.as_mut() {
            let row = extract_boundary(&next, g, p.strike, opts.extract);
            diagnostics.flagged_boundary_nodes += row.flagged.iter().filter(|&&f| f).count();
            b.push(row);
        }
        if opts.retain_all {
            retained.push(next.clone());
        }
        v = next;
    }
    if let Some(b) = &own_boundary {
        diagnostics.smooth_pasting = smooth_pasting(&v, g, &b.levels[b.n_levels() - 1]);
    }
    if !opts.retain_all {
        retained.push(v);
    }
    diagnostics.wall_time_secs = started.elapsed().as_secs_f64();
    Ok(PricingResult {
        side,
        style: opts.style,
        grid: g.clone(),
        params: p,
        surfaces: retained,
        boundary: own_boundary,
        diagnostics,
    })
}
