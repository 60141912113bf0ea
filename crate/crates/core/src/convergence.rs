//! Convergence ladders and order estimates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adi::{price_both, AdiOptions, PricingResult};
use crate::error::PdeError;
use crate::explicit::{price_explicit_both, ExplicitOptions};
use crate::model::{build_grid, Grid, GridSpec, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Tau,
    S,
    L,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub steps: usize,
    pub value: f64,
    /// `|V_i - V_{i-1}|`
    pub difference: Option<f64>,
    /// `(ln D_i - ln D_{i-1}) / (ln N_{i-1} - ln N_i)`
    pub eoc: Option<f64>,
    /// Order `p` solving `(V_i - V_{i-1}) / (V_{i-1} - V_{i-2}) = (h_{i-1}^p - h_i^p) / (h_{i-2}^p - h_{i-1}^p)`
    /// with `h = 1/N`. Unlike `eoc` this is exact for an error `C h^p` on any ladder.
    pub observed_order: Option<f64>,
}

/// Tabulates differences and order estimates for values on an increasing ladder of step counts.
pub fn eoc_table(steps: &[usize], values: &[f64]) -> Vec<LadderRow> {
    let n = steps.len().min(values.len());
    let mut rows: Vec<LadderRow> = (0..n)
        .map(|i| LadderRow {
            steps: steps[i],
            value: values[i],
            difference: None,
            eoc: None,
            observed_order: None,
        })
        .collect();
    for i in 1..n {
        rows[i].difference = Some((values[i] - values[i - 1]).abs());
    }
    for i in 2..n {
        let (d1, d2) = (rows[i - 1].difference.unwrap(), rows[i].difference.unwrap());
        if d1 > 0.0 && d2 > 0.0 {
            rows[i].eoc =
                Some((d2.ln() - d1.ln()) / ((steps[i - 1] as f64).ln() - (steps[i] as f64).ln()));
        }
        let h = [steps[i - 2], steps[i - 1], steps[i]].map(|s| 1.0 / s as f64);
        rows[i].observed_order = observed_order(h, [values[i - 2], values[i - 1], values[i]]);
    }
    rows
}

fn observed_order(h: [f64; 3], v: [f64; 3]) -> Option<f64> {
    let ratio = (v[2] - v[1]) / (v[1] - v[0]);
    if !ratio.is_finite() || ratio <= 0.0 {
        return None;
    }
    let g = |p: f64| (h[1].powf(p) - h[2].powf(p)) / (h[0].powf(p) - h[1].powf(p)) - ratio;
    // g decreases in p on a refining ladder
    let (mut lo, mut hi) = (1e-3, 10.0);
    if g(lo) < 0.0 || g(hi) > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderPoint {
    pub steps: usize,
    pub holder: f64,
    pub writer: f64,
}

#[allow(clippy::too_many_arguments)]
fn ladder<F>(
    p: &ModelParams,
    s0: f64,
    l0: f64,
    base: (usize, usize, usize),
    spec: GridSpec,
    direction: Direction,
    counts: &[usize],
    price: F,
) -> Result<Vec<LadderPoint>, PdeError>
where
    F: Fn(&Grid) -> Result<(PricingResult, PricingResult), PdeError> + Sync,
{
    counts
        .par_iter()
        .map(|&c| {
            let (n_s, n_l, n_t) = match direction {
                Direction::Tau => (base.0, base.1, c),
                Direction::S => (c, base.1, base.2),
                Direction::L => (base.0, c, base.2),
            };
            let g = build_grid(n_s, n_l, n_t, p, spec)?;
            let (h, w) = price(&g)?;
            Ok(LadderPoint {
                steps: c,
                holder: h.price_at(s0, l0)?,
                writer: w.price_at(s0, l0)?,
            })
        })
        .collect()
}

/// ADI holder and writer prices at `(s0, l0)` while one grid dimension runs
/// through `counts` and the other two stay at `base = (n_s, n_l, n_t)`.
#[allow(clippy::too_many_arguments)]
pub fn adi_ladder(
    p: &ModelParams,
    s0: f64,
    l0: f64,
    base: (usize, usize, usize),
    spec: GridSpec,
    direction: Direction,
    counts: &[usize],
    opts: &AdiOptions,
) -> Result<Vec<LadderPoint>, PdeError> {
    ladder(p, s0, l0, base, spec, direction, counts, |g| {
        price_both(p, g, opts)
    })
}

/// Same as [`adi_ladder`] with the explicit scheme.
#[allow(clippy::too_many_arguments)]
pub fn explicit_ladder(
    p: &ModelParams,
    s0: f64,
    l0: f64,
    base: (usize, usize, usize),
    spec: GridSpec,
    direction: Direction,
    counts: &[usize],
    opts: &ExplicitOptions,
) -> Result<Vec<LadderPoint>, PdeError> {
    ladder(p, s0, l0, base, spec, direction, counts, |g| {
        price_explicit_both(p, g, opts)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_order_on_doubling_ladder() {
        let steps = [100, 200, 400, 800];
        let values: Vec<f64> = steps.iter().map(|&n| 1.0 + 3.0 / n as f64).collect();
        let rows = eoc_table(&steps, &values);
        assert!(rows[0].difference.is_none());
        for r in &rows[2..] {
            assert!((r.eoc.unwrap() - 1.0).abs() < 1e-9);
            assert!((r.observed_order.unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn ratio_formula_inflates_on_arithmetic_ladder() {
        // the ratio formula mixes step ratios; the three-point order does not
        let steps = [2000, 3000, 4000, 5000];
        let values: Vec<f64> = steps.iter().map(|&n| 2.0 - 5.0 / n as f64).collect();
        let rows = eoc_table(&steps, &values);
        assert!(rows[2].eoc.unwrap() > 1.5);
        assert!((rows[2].observed_order.unwrap() - 1.0).abs() < 1e-9);
        assert!((rows[3].observed_order.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn second_order_detected() {
        let steps = [10, 20, 40];
        let values: Vec<f64> = steps.iter().map(|&n| 0.5 + 2.0 / (n * n) as f64).collect();
        let rows = eoc_table(&steps, &values);
        assert!((rows[2].observed_order.unwrap() - 2.0).abs() < 1e-9);
    }
}
