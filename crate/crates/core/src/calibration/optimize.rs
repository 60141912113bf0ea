//! Bounded Nelder-Mead with restarts, and numerical-Hessian standard errors.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::CalibrationError;

/// Objective value substituted for points where the objective fails.
pub const INVALID_OBJECTIVE: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOptions {
    /// Total budget across all restarts.
    pub max_evals: usize,
    /// Stop when the simplex diameter relative to the best point drops below this.
    pub rel_tol: f64,
    pub restarts: usize,
    /// Initial simplex edge as a fraction of each bounded interval.
    pub initial_step: f64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            max_evals: 2000,
            rel_tol: 1e-6,
            restarts: 2,
            initial_step: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    /// Full parameter vector, fixed coordinates included.
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    /// False when the evaluation budget ran out first.
    pub converged: bool,
}

struct Problem<'a, F> {
    f: &'a F,
    base: Vec<f64>,
    free: Vec<usize>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    evals: usize,
}

impl<F: Fn(&[f64]) -> f64> Problem<'_, F> {
    fn expand(&self, y: &[f64]) -> Vec<f64> {
        let mut x = self.base.clone();
        for (k, &i) in self.free.iter().enumerate() {
            x[i] = y[k];
        }
        x
    }

    fn clamp(&self, y: &mut [f64]) {
        for (k, v) in y.iter_mut().enumerate() {
            *v = v.clamp(self.lower[k], self.upper[k]);
        }
    }

    fn eval(&mut self, y: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.f)(&self.expand(y));
        if v.is_finite() {
            v
        } else {
            INVALID_OBJECTIVE
        }
    }
}

fn check_inputs(
    init: &[f64],
    lower: &[f64],
    upper: &[f64],
    fixed: &[bool],
) -> Result<(), CalibrationError> {
    let n = init.len();
    for len in [lower.len(), upper.len(), fixed.len()] {
        if len != n {
            return Err(CalibrationError::DimensionMismatch {
                expected: n,
                got: len,
            });
        }
    }
    for (index, &value) in init.iter().enumerate() {
        let (lo, hi) = (lower[index], upper[index]);
        if !(value >= lo && value <= hi) {
            return Err(CalibrationError::InitOutsideBounds {
                index,
                value,
                lower: lo,
                upper: hi,
            });
        }
    }
    Ok(())
}

/// Minimises `neg_loglik` over the box `[lower, upper]`, holding coordinates
/// with `fixed[i] = true` at their initial value.
///
/// Trial points are projected onto the box. Non-finite objective values are
/// replaced by [`INVALID_OBJECTIVE`].
pub fn maximize_loglik<F>(
    neg_loglik: F,
    init: &[f64],
    lower: &[f64],
    upper: &[f64],
    fixed: &[bool],
    opts: &OptimizeOptions,
) -> Result<OptimizeResult, CalibrationError>
where
    F: Fn(&[f64]) -> f64,
{
    check_inputs(init, lower, upper, fixed)?;
    let free: Vec<usize> = (0..init.len()).filter(|&i| !fixed[i]).collect();
    let mut prob = Problem {
        f: &neg_loglik,
        base: init.to_vec(),
        lower: free.iter().map(|&i| lower[i]).collect(),
        upper: free.iter().map(|&i| upper[i]).collect(),
        free,
        evals: 0,
    };
    let y0: Vec<f64> = prob.free.iter().map(|&i| init[i]).collect();
    if y0.is_empty() {
        let value = prob.eval(&y0);
        return Ok(OptimizeResult {
            x: init.to_vec(),
            value,
            evals: 1,
            converged: true,
        });
    }

    let mut best = y0;
    let mut best_value = f64::INFINITY;
    let mut converged = false;
    for _ in 0..=opts.restarts {
        let (y, v, done) = simplex_search(&mut prob, &best, opts);
        let improved = v < best_value - 1e-12 * best_value.abs().max(1.0);
        if v <= best_value {
            best = y;
            best_value = v;
        }
        converged = done;
        if !done || !improved {
            break;
        }
    }
    Ok(OptimizeResult {
        x: prob.expand(&best),
        value: best_value,
        evals: prob.evals,
        converged,
    })
}

fn simplex_search<F: Fn(&[f64]) -> f64>(
    prob: &mut Problem<'_, F>,
    start: &[f64],
    opts: &OptimizeOptions,
) -> (Vec<f64>, f64, bool) {
    let n = start.len();
    let mut pts = vec![start.to_vec()];
    for k in 0..n {
        let width = prob.upper[k] - prob.lower[k];
        let step = if width.is_finite() {
            opts.initial_step * width
        } else {
            opts.initial_step * start[k].abs().max(1.0)
        };
        let mut p = start.to_vec();
        p[k] = if p[k] + step <= prob.upper[k] {
            p[k] + step
        } else {
            p[k] - step
        };
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| prob.eval(p)).collect();

    let (a, g, rc, s) = (1.0, 2.0, 0.5, 0.5);
    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let scale = pts[0].iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let diameter = pts[1..]
            .iter()
            .flat_map(|p| p.iter().zip(&pts[0]).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max);
        if diameter / scale < opts.rel_tol {
            return (pts[0].clone(), vals[0], true);
        }
        if prob.evals >= opts.max_evals {
            return (pts[0].clone(), vals[0], false);
        }

        let mut centroid = vec![0.0; n];
        for p in &pts[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / n as f64;
            }
        }
        let toward = |t: f64, from: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(from)
                .map(|(c, x)| c + t * (x - c))
                .collect()
        };

        let mut xr = toward(-a, &pts[n]);
        prob.clamp(&mut xr);
        let fr = prob.eval(&xr);
        if fr < vals[0] {
            let mut xe = toward(-g, &pts[n]);
            prob.clamp(&mut xe);
            let fe = prob.eval(&xe);
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
            continue;
        }
        // outside contraction if the reflection helped at all, inside otherwise
        let t = if fr < vals[n] { -rc } else { rc };
        let mut xc = toward(t, &pts[n]);
        prob.clamp(&mut xc);
        let fc = prob.eval(&xc);
        if fc < vals[n].min(fr) {
            pts[n] = xc;
            vals[n] = fc;
            continue;
        }
        for k in 1..=n {
            let shrunk: Vec<f64> = pts[0]
                .iter()
                .zip(&pts[k])
                .map(|(b, x)| b + s * (x - b))
                .collect();
            vals[k] = prob.eval(&shrunk);
            pts[k] = shrunk;
        }
    }
}

/// Central-difference Hessian of `f` at `x` over the coordinates in `free`,
/// inverted to give asymptotic standard errors. Entries are `None` for fixed
/// coordinates, and all are `None` when the Hessian is not finite and
/// positive definite.
pub fn hessian_std_errors<F>(f: F, x: &[f64], free: &[usize]) -> Vec<Option<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let m = free.len();
    let mut out = vec![None; x.len()];
    if m == 0 {
        return out;
    }
    let h: Vec<f64> = free.iter().map(|&i| 1e-4 * x[i].abs().max(1e-2)).collect();
    let at = |shifts: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(k, d) in shifts {
            y[free[k]] += d;
        }
        f(&y)
    };
    let f0 = f(x);
    let mut hess = DMatrix::zeros(m, m);
    for a in 0..m {
        let fp = at(&[(a, h[a])]);
        let fm = at(&[(a, -h[a])]);
        hess[(a, a)] = (fp - 2.0 * f0 + fm) / (h[a] * h[a]);
        for b in 0..a {
            let v = (at(&[(a, h[a]), (b, h[b])])
                - at(&[(a, h[a]), (b, -h[b])])
                - at(&[(a, -h[a]), (b, h[b])])
                + at(&[(a, -h[a]), (b, -h[b])]))
                / (4.0 * h[a] * h[b]);
            hess[(a, b)] = v;
            hess[(b, a)] = v;
        }
    }
    // a non-finite entry means a perturbed point left the admissible region
    if hess.iter().any(|v| !v.is_finite()) {
        return out;
    }
    let Some(chol) = hess.cholesky() else {
        return out;
    };
    let inv = chol.inverse();
    for (k, &i) in free.iter().enumerate() {
        let v = inv[(k, k)];
        if v.is_finite() && v > 0.0 {
            out[i] = Some(v.sqrt());
        }
    }
    out
}
