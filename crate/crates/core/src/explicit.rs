//! Fully explicit (forward Euler) finite differences for the holder and
//! writer problems. Deliberately shares no stencil code with the ADI path so
//! the two can be used to check each other.
//!
//! Stability is the caller's problem: the step must satisfy roughly
//! `dtau * S_max^2 * (beta^2 l_max^2 + sigma_S^2) / dS^2 < 1`. A blow-up is
//! reported as [`PdeError::InstabilityDetected`] once any node exceeds `10 K`.

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adi::{
    apply_exercise, extract_boundary, BoundaryLag, Diagnostics, Exercise, ExtractOptions,
    PricingResult,
};
use crate::error::PdeError;
use crate::model::{Grid, ModelParams};
use crate::surface::{ExerciseBoundary, ExerciseStyle, PriceSurface, Side};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExplicitOptions {
    pub style: ExerciseStyle,
    pub retain_all: bool,
    pub writer_boundary_lag: BoundaryLag,
    pub extract: ExtractOptions,
}

impl Default for ExplicitOptions {
    fn default() -> Self {
        Self {
            style: ExerciseStyle::American,
            retain_all: false,
            writer_boundary_lag: BoundaryLag::Previous,
            extract: ExtractOptions::default(),
        }
    }
}

/// Per-`L` coefficients of the operator.
struct Row {
    /// `beta^2 L^2 + sigma_S^2 + 2 rho1 sigma_S beta L`
    total_var: f64,
    /// `rho3 sigma_L beta L + rho2 sigma_S sigma_L`
    cross: f64,
    /// `alpha (theta(L) - L)`
    drift: f64,
    l: f64,
}

struct Operator<'a> {
    g: &'a Grid,
    p: &'a ModelParams,
    rows: Vec<Row>,
    /// `sqrt(2 / (pi dt)) * kappa`
    cost_scale: f64,
    sign: f64,
    inv_ds2: f64,
    inv_dl2: f64,
    inv_2ds: f64,
    inv_2dl: f64,
    inv_4dsdl: f64,
}

impl<'a> Operator<'a> {
    fn new(g: &'a Grid, p: &'a ModelParams, side: Side) -> Self {
        let rows =
            g.l.iter()
                .map(|&l| Row {
                    total_var: p.beta * p.beta * l * l
                        + p.sigma_s * p.sigma_s
                        + 2.0 * p.rho1 * p.sigma_s * p.beta * l,
                    cross: p.rho3 * p.sigma_l * p.beta * l + p.rho2 * p.sigma_s * p.sigma_l,
                    drift: p.alpha * (p.theta_effective_abs(l) - l),
                    l,
                })
                .collect();
        Self {
            g,
            p,
            rows,
            cost_scale: (2.0 / (PI * p.delta_t)).sqrt() * p.kappa,
            sign: match side {
                Side::Holder => 1.0,
                Side::Writer => -1.0,
            },
            inv_ds2: 1.0 / (g.ds * g.ds),
            inv_dl2: 1.0 / (g.dl * g.dl),
            inv_2ds: 0.5 / g.ds,
            inv_2dl: 0.5 / g.dl,
            inv_4dsdl: 0.25 / (g.ds * g.dl),
        }
    }

    /// Expected hedging cost rate `sqrt(2/(pi dt)) kappa S |.|`.
    fn cost(
        &self,
        s: f64,
        phi: f64,
        psi1: f64,
        psi2: f64,
        at: (usize, usize),
    ) -> Result<f64, PdeError> {
        if self.cost_scale == 0.0 {
            return Ok(0.0);
        }
        let p = self.p;
        let q = phi * phi
            + psi1 * psi1
            + psi2 * psi2
            + 2.0 * p.rho1 * phi * psi1
            + 2.0 * p.rho2 * psi1 * psi2
            + 2.0 * p.rho3 * phi * psi2;
        let scale = (phi * phi + psi1 * psi1 + psi2 * psi2).max(1.0);
        if q < -1e-14 * scale {
            return Err(PdeError::NegativeRadicand {
                i: at.0,
                j: at.1,
                value: q,
            });
        }
        Ok(self.cost_scale * s * q.max(0.0).sqrt())
    }

    /// `dV/dtau` at an interior node.
    fn rate(&self, v: &[f64], i: usize, j: usize) -> Result<f64, PdeError> {
        let g = self.g;
        let p = self.p;
        let n_l = g.n_l;
        let at = |a: usize, b: usize| v[a * n_l + b];
        let s = g.s[i];
        let row = &self.rows[j];
        let here = at(i, j);
        let v_ss = (at(i + 1, j) - 2.0 * here + at(i - 1, j)) * self.inv_ds2;
        let v_ll = (at(i, j + 1) - 2.0 * here + at(i, j - 1)) * self.inv_dl2;
        let v_s = (at(i + 1, j) - at(i - 1, j)) * self.inv_2ds;
        let v_l = (at(i, j + 1) - at(i, j - 1)) * self.inv_2dl;
        let v_sl = (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1) + at(i - 1, j - 1))
            * self.inv_4dsdl;
        let linear = 0.5 * s * s * row.total_var * v_ss
            + 0.5 * p.sigma_l * p.sigma_l * v_ll
            + row.cross * s * v_sl
            + p.r * s * v_s
            + row.drift * v_l
            - p.r * here;
        let phi = p.beta * row.l * s * v_ss;
        let psi1 = p.sigma_s * s * v_ss;
        let psi2 = p.sigma_l * v_sl;
        Ok(linear - self.sign * self.cost(s, phi, psi1, psi2, (i, j))?)
    }

    /// `dV/dtau` on the `L = 0` row, where the liquidity diffusion
    /// degenerates and the `L` derivatives are taken from one side.
    fn rate_at_zero(&self, v: &[f64], i: usize) -> Result<f64, PdeError> {
        let g = self.g;
        let p = self.p;
        let n_l = g.n_l;
        let at = |a: usize, b: usize| v[a * n_l + b];
        let s = g.s[i];
        let row = &self.rows[0];
        let here = at(i, 0);
        let v_ss = (at(i + 1, 0) - 2.0 * here + at(i - 1, 0)) * self.inv_ds2;
        let v_s = (at(i + 1, 0) - at(i - 1, 0)) * self.inv_2ds;
        let v_ll = (2.0 * here - 5.0 * at(i, 1) + 4.0 * at(i, 2) - at(i, 3)) * self.inv_dl2;
        let v_l = (4.0 * at(i, 1) - 3.0 * here - at(i, 2)) * self.inv_2dl;
        let v_sl = ((at(i + 1, 1) - at(i - 1, 1)) - (at(i + 1, 0) - at(i - 1, 0)))
            * (2.0 * self.inv_4dsdl);
        let linear = 0.5 * s * s * p.sigma_s * p.sigma_s * v_ss
            + 0.5 * p.sigma_l * p.sigma_l * v_ll
            + p.rho2 * p.sigma_s * p.sigma_l * s * v_sl
            + p.r * s * v_s
            + row.drift * v_l
            - p.r * here;
        let psi1 = p.sigma_s * s * v_ss;
        let psi2 = p.sigma_l * v_sl;
        Ok(linear - self.sign * self.cost(s, 0.0, psi1, psi2, (i, 0))?)
    }

    /// One forward Euler step from `v` into `out`, boundaries included.
    fn step(&self, v: &[f64], out: &mut [f64]) -> Result<(), PdeError> {
        let g = self.g;
        let (n_s, n_l) = (g.n_s, g.n_l);
        let dt = g.dtau;
        let strike = self.p.strike;
        out.par_chunks_mut(n_l)
            .enumerate()
            .try_for_each(|(i, line)| {
                if i == 0 {
                    line.fill(strike);
                    return Ok(());
                }
                if i == n_s - 1 {
                    line.fill(0.0);
                    return Ok(());
                }
                line[0] = v[i * n_l] + dt * self.rate_at_zero(v, i)?;
                for j in 1..n_l - 1 {
                    line[j] = v[i * n_l + j] + dt * self.rate(v, i, j)?;
                }
                line[n_l - 1] = line[n_l - 2];
                Ok(())
            })
    }
}

/// Explicit run for one side. For an American writer the holder problem is
/// solved first to obtain the exercise region.
pub fn price_explicit(
    p: &ModelParams,
    g: &Grid,
    side: Side,
    opts: &ExplicitOptions,
) -> Result<PricingResult, PdeError> {
    match (side, opts.style) {
        (Side::Writer, ExerciseStyle::American) => {
            let holder = march(p, g, opts, Side::Holder, None)?;
            let b = holder
                .boundary
                .as_ref()
                .expect("american holder run has a boundary");
            march(p, g, opts, Side::Writer, Some(b))
        }
        _ => march(p, g, opts, side, None),
    }
}

/// Holder and writer from one holder march.
pub fn price_explicit_both(
    p: &ModelParams,
    g: &Grid,
    opts: &ExplicitOptions,
) -> Result<(PricingResult, PricingResult), PdeError> {
    let holder = march(p, g, opts, Side::Holder, None)?;
    let writer = match &holder.boundary {
        Some(b) => march(p, g, opts, Side::Writer, Some(b))?,
        None => march(p, g, opts, Side::Writer, None)?,
    };
    Ok((holder, writer))
}

/// Explicit writer run on a given holder boundary, e.g. one from the ADI pricer.
pub fn price_explicit_writer(
    p: &ModelParams,
    g: &Grid,
    boundary: &ExerciseBoundary,
    opts: &ExplicitOptions,
) -> Result<PricingResult, PdeError> {
    if boundary.n_levels() != g.n_t {
        return Err(PdeError::BoundaryMismatch {
            expected: g.n_t,
            got: boundary.n_levels(),
        });
    }
    march(p, g, opts, Side::Writer, Some(boundary))
}

fn march(
    p: &ModelParams,
    g: &Grid,
    opts: &ExplicitOptions,
    side: Side,
    holder_boundary: Option<&ExerciseBoundary>,
) -> Result<PricingResult, PdeError> {
    let p = p.validate()?;
    let started = Instant::now();
    let op = Operator::new(g, &p, side);
    let american = opts.style == ExerciseStyle::American;
    let mut cur = PriceSurface::payoff(g, p.strike, side, opts.style);
    let mut next = cur.clone();
    let mut retained = Vec::new();
    if opts.retain_all {
        retained.push(cur.clone());
    }
    let mut own_boundary =
        (american && side == Side::Holder).then(|| ExerciseBoundary::at_expiry(g.n_l, p.strike));
    let mut diagnostics = Diagnostics {
        step_changes: Vec::with_capacity(g.n_t - 1),
        ..Diagnostics::default()
    };
    let limit = 10.0 * p.strike;

    for n in 0..g.n_t - 1 {
        op.step(&cur.values, &mut next.values)?;
        next.time_index = n + 1;
        let exercise = match (american, side, holder_boundary) {
            (true, Side::Holder, _) => Exercise::Project,
            (true, Side::Writer, Some(b)) => Exercise::Region(match opts.writer_boundary_lag {
                BoundaryLag::Previous => &b.levels[n],
                BoundaryLag::Current => &b.levels[n + 1],
            }),
            _ => Exercise::None,
        };
        apply_exercise(&mut next, g, p.strike, exercise);

        let mut change = 0.0f64;
        let mut peak = 0.0f64;
        for (a, b) in cur.values.iter().zip(&next.values) {
            change = change.max((a - b).abs());
            peak = if b.is_finite() {
                peak.max(b.abs())
            } else {
                f64::INFINITY
            };
        }
        if peak > limit {
            return Err(PdeError::InstabilityDetected {
                level: n + 1,
                magnitude: peak,
            });
        }
        diagnostics.step_changes.push(change);
        if let Some(b) = own_boundary.as_mut() {
            let row = extract_boundary(&next, g, p.strike, opts.extract);
            diagnostics.flagged_boundary_nodes += row.flagged.iter().filter(|&&f| f).count();
            b.push(row);
        }
        std::mem::swap(&mut cur, &mut next);
        if opts.retain_all {
            retained.push(cur.clone());
        }
    }
    if !opts.retain_all {
        retained.push(cur);
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
