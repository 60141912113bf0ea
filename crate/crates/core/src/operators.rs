//! Discrete spatial operators of the two-factor pricing PDE.
//!
//! With `S_i = i dS` the `S`-direction coefficients collapse to
//! functions of the node index:
//!
//! ```text
//! k0 = i^2 (beta^2 L^2 + sigma_S^2 + 2 rho1 sigma_S beta L)
//! k1 = i dtau / (4 dL) (rho3 sigma_L beta L + rho2 sigma_S sigma_L)
//! k2 = beta i L / dS * (V[i+1] - 2 V[i] + V[i-1])          = beta L S V_SS
//! k3 = sigma_S i / dS * (V[i+1] - 2 V[i] + V[i-1])         = sigma_S S V_SS
//! k4 = sigma_L / (4 dS dL) * (V[i+1,j+1] - V[i+1,j-1] - V[i-1,j+1] + V[i-1,j-1])
//! ```
//!
//! `k2..k4` are always evaluated on the previous time level, so the
//! transaction-cost nonlinearity is treated explicitly.

use std::f64::consts::PI;

use crate::error::PdeError;
use crate::model::{Grid, ModelParams};
use crate::surface::{PriceSurface, Side};
use crate::tridiag::{SweepLine, SweepSystem};

/// Negative radicands above this (relative to the size of the quadratic
/// form) are rounding noise and clamp to zero.
pub const RADICAND_CLAMP: f64 = -1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil {
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
}

#[inline]
fn check_interior(v: &PriceSurface, i: usize, j: usize) -> Result<(), PdeError> {
    if i == 0 || j == 0 || i + 1 >= v.n_s || j + 1 >= v.n_l {
        return Err(PdeError::IndexOutOfInterior { i, j });
    }
    Ok(())
}

#[inline]
pub(crate) fn k0_at(i: usize, l: f64, p: &ModelParams) -> f64 {
    let fi = i as f64;
    fi * fi * p.local_variance(l)
}

#[inline]
pub(crate) fn k1_at(i: usize, l: f64, g: &Grid, p: &ModelParams) -> f64 {
    i as f64 * g.dtau / (4.0 * g.dl)
        * (p.rho3 * p.sigma_l * p.beta * l + p.rho2 * p.sigma_s * p.sigma_l)
}

/// Cross-difference `V[i+1,j+1] - V[i+1,j-1] - V[i-1,j+1] + V[i-1,j-1]`.
#[inline]
fn cross(v: &PriceSurface, i: usize, j: usize) -> f64 {
    v.get(i + 1, j + 1) - v.get(i + 1, j - 1) - v.get(i - 1, j + 1) + v.get(i - 1, j - 1)
}

/// The five stencil coefficients at interior node `(i, j)`.
pub fn stencil_k(
    v_prev: &PriceSurface,
    i: usize,
    j: usize,
    g: &Grid,
    p: &ModelParams,
) -> Result<Stencil, PdeError> {
    check_interior(v_prev, i, j)?;
    Ok(stencil_unchecked(v_prev, i, j, g, p))
}

#[inline]
fn stencil_unchecked(v: &PriceSurface, i: usize, j: usize, g: &Grid, p: &ModelParams) -> Stencil {
    let l = g.l[j];
    let fi = i as f64;
    let second = v.get(i + 1, j) - 2.0 * v.get(i, j) + v.get(i - 1, j);
    Stencil {
        k0: k0_at(i, l, p),
        k1: k1_at(i, l, g, p),
        k2: p.beta * fi * l / g.ds * second,
        k3: p.sigma_s * fi / g.ds * second,
        k4: p.sigma_l / (4.0 * g.ds * g.dl) * cross(v, i, j),
    }
}

/// `sqrt(2 / (pi dt))`, the expected absolute value factor for a normal
/// increment over one hedging interval, per unit time.
#[inline]
pub fn hedging_factor(p: &ModelParams) -> f64 {
    (2.0 / (PI * p.delta_t)).sqrt()
}

/// Square root of the correlated quadratic form in `(phi, psi1, psi2)`.
#[inline]
pub(crate) fn cost_norm(
    phi: f64,
    psi1: f64,
    psi2: f64,
    p: &ModelParams,
    at: (usize, usize),
) -> Result<f64, PdeError> {
    let squares = phi * phi + psi1 * psi1 + psi2 * psi2;
    let rad = squares
        + 2.0 * p.rho1 * phi * psi1
        + 2.0 * p.rho2 * psi1 * psi2
        + 2.0 * p.rho3 * phi * psi2;
    if rad >= 0.0 {
        Ok(rad.sqrt())
    } else if rad > RADICAND_CLAMP * squares.max(1.0) {
        Ok(0.0)
    } else {
        Err(PdeError::NegativeRadicand {
            i: at.0,
            j: at.1,
            value: rad,
        })
    }
}

#[inline]
fn cost_from_stencil(
    st: &Stencil,
    s: f64,
    p: &ModelParams,
    at: (usize, usize),
) -> Result<f64, PdeError> {
    if p.kappa == 0.0 {
        return Ok(0.0);
    }
    Ok(hedging_factor(p) * p.kappa * s * cost_norm(st.k2, st.k3, st.k4, p, at)?)
}

/// Expected hedging cost per unit time at interior node `(i, j)`, before the
/// side sign and the `dtau` factor.
pub fn cost_term(
    v_prev: &PriceSurface,
    i: usize,
    j: usize,
    g: &Grid,
    p: &ModelParams,
) -> Result<f64, PdeError> {
    let st = stencil_k(v_prev, i, j, g, p)?;
    cost_from_stencil(&st, g.s[i], p, (i, j))
}

/// `alpha (theta(L) - L)`: the drift of `L` at node `j`.
#[inline]
pub(crate) fn l_drift(l: f64, p: &ModelParams) -> f64 {
    p.alpha * (p.theta_effective_abs(l) - l)
}

/// Builds the implicit-in-`S` system for line `j` (first sub-step).
///
/// `half_edges` are the values of the intermediate level at `i = 0` and
/// `i = n_s - 1`; they enter the first and last right-hand-side entries.
pub fn assemble_s_sweep(
    v_n: &PriceSurface,
    j: usize,
    g: &Grid,
    p: &ModelParams,
    side: Side,
    eta: f64,
    half_edges: [f64; 2],
) -> Result<SweepSystem, PdeError> {
    if j == 0 || j + 1 >= g.n_l {
        return Err(PdeError::IndexOutOfInterior { i: 1, j });
    }
    let m = g.n_s - 2;
    let mut sys = SweepSystem {
        lower: Vec::with_capacity(m - 1),
        diag: Vec::with_capacity(m),
        upper: Vec::with_capacity(m - 1),
        rhs: Vec::with_capacity(m),
        line: SweepLine::S { j },
    };
    let dt = g.dtau;
    let r = p.r;
    let l = g.l[j];
    let sl2 = p.sigma_l * p.sigma_l / g.dl;
    let drift = l_drift(l, p);
    let up_l = dt / (2.0 * g.dl) * (sl2 + drift);
    let down_l = dt / (2.0 * g.dl) * (sl2 - drift);
    let centre_l = dt * (sl2 / g.dl + r / 2.0);
    let sign = side.sign();
    let mut first_f = 0.0;
    let mut last_e = 0.0;
    for i in 1..g.n_s - 1 {
        let st = stencil_unchecked(v_n, i, j, g, p);
        let ir = i as f64 * r;
        let d = 1.0 + eta * dt * st.k0 + r * eta * dt / 2.0;
        let e = eta * dt / 2.0 * (st.k0 + ir);
        let f = eta * dt / 2.0 * (st.k0 - ir);
        let expl = (1.0 - eta) * dt / 2.0;
        let cost = cost_from_stencil(&st, g.s[i], p, (i, j))?;
        let rhs = (1.0 - dt * (1.0 - eta) * (st.k0 + r / 2.0) - centre_l) * v_n.get(i, j)
            + expl * (st.k0 + ir) * v_n.get(i + 1, j)
            + expl * (st.k0 - ir) * v_n.get(i - 1, j)
            + up_l * v_n.get(i, j + 1)
            + down_l * v_n.get(i, j - 1)
            + st.k1 * cross(v_n, i, j)
            - sign * dt * cost;
        sys.diag.push(d);
        sys.rhs.push(rhs);
        if i > 1 {
            sys.lower.push(-f);
        } else {
            first_f = f;
        }
        if i < g.n_s - 2 {
            sys.upper.push(-e);
        } else {
            last_e = e;
        }
    }
    sys.rhs[0] += first_f * half_edges[0];
    sys.rhs[m - 1] += last_e * half_edges[1];
    Ok(sys)
}

/// Condition imposed at `L = l_max` in the second sub-step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpperLiquidityEdge {
    /// `dV/dL = 0`, eliminated as `V[n_l - 1] = V[n_l - 2]`.
    Neumann,
    /// Prescribed value at the new level.
    Dirichlet(f64),
}

/// Builds the implicit-in-`L` system for line `i` (second sub-step).
///
/// `low_edge` is the new-level value at `L = 0`.
#[allow(clippy::too_many_arguments)]
pub fn assemble_l_sweep(
    v_half: &PriceSurface,
    v_n: &PriceSurface,
    i: usize,
    g: &Grid,
    p: &ModelParams,
    eta: f64,
    low_edge: f64,
    top: UpperLiquidityEdge,
) -> Result<SweepSystem, PdeError> {
    if i == 0 || i + 1 >= g.n_s {
        return Err(PdeError::IndexOutOfInterior { i, j: 1 });
    }
    let m = g.n_l - 2;
    let mut sys = SweepSystem {
        lower: Vec::with_capacity(m - 1),
        diag: Vec::with_capacity(m),
        upper: Vec::with_capacity(m - 1),
        rhs: Vec::with_capacity(m),
        line: SweepLine::L { i },
    };
    let dt = g.dtau;
    let sl2 = p.sigma_l * p.sigma_l / g.dl;
    let centre = eta * dt * (sl2 / g.dl + p.r / 2.0);
    let g_diag = 1.0 + centre;
    let half = v_half.l_line(i);
    let prev = v_n.l_line(i);
    let mut first_m = 0.0;
    let mut last_h = 0.0;
    for j in 1..g.n_l - 1 {
        let drift = l_drift(g.l[j], p);
        let h = eta * dt / (2.0 * g.dl) * (sl2 + drift);
        let mm = eta * dt / (2.0 * g.dl) * (sl2 - drift);
        let rr = half[j] + centre * prev[j] - h * prev[j + 1] - mm * prev[j - 1];
        sys.diag.push(g_diag);
        sys.rhs.push(rr);
        if j > 1 {
            sys.lower.push(-mm);
        } else {
            first_m = mm;
        }
        if j < g.n_l - 2 {
            sys.upper.push(-h);
        } else {
            last_h = h;
        }
    }
    sys.rhs[0] += first_m * low_edge;
    match top {
        UpperLiquidityEdge::Neumann => sys.diag[m - 1] -= last_h,
        UpperLiquidityEdge::Dirichlet(v) => sys.rhs[m - 1] += last_h * v,
    }
    Ok(sys)
}

/// `(2 V0 - 5 V1 + 4 V2 - V3) / dL^2`: second derivative at the first node
/// from one side, exact on quadratics.
#[inline]
pub fn one_sided_second_derivative(v0: f64, v1: f64, v2: f64, v3: f64, dl: f64) -> f64 {
    (2.0 * v0 - 5.0 * v1 + 4.0 * v2 - v3) / (dl * dl)
}

/// `(-3 V0 + 4 V1 - V2) / (2 dL)`: first derivative at the first node from one side.
#[inline]
pub fn one_sided_first_derivative(v0: f64, v1: f64, v2: f64, dl: f64) -> f64 {
    (-3.0 * v0 + 4.0 * v1 - v2) / (2.0 * dl)
}

/// Time derivative `dV/dtau` of the reduced operator on the `L = 0` row.
pub fn degenerate_rate(
    v: &PriceSurface,
    i: usize,
    g: &Grid,
    p: &ModelParams,
    side: Side,
) -> Result<f64, PdeError> {
    if i == 0 || i + 1 >= g.n_s {
        return Err(PdeError::IndexOutOfInterior { i, j: 0 });
    }
    let s = g.s[i];
    let (ds, dl) = (g.ds, g.dl);
    let here = v.get(i, 0);
    let v_ss = (v.get(i + 1, 0) - 2.0 * here + v.get(i - 1, 0)) / (ds * ds);
    let v_s = (v.get(i + 1, 0) - v.get(i - 1, 0)) / (2.0 * ds);
    let v_ll = one_sided_second_derivative(here, v.get(i, 1), v.get(i, 2), v.get(i, 3), dl);
    let v_l = one_sided_first_derivative(here, v.get(i, 1), v.get(i, 2), dl);
    let v_sl =
        (v.get(i + 1, 1) - v.get(i + 1, 0) - v.get(i - 1, 1) + v.get(i - 1, 0)) / (2.0 * ds * dl);
    let mut rate = 0.5 * p.sigma_s * p.sigma_s * s * s * v_ss
        + 0.5 * p.sigma_l * p.sigma_l * v_ll
        + p.rho2 * p.sigma_s * p.sigma_l * s * v_sl
        + p.r * s * v_s
        + p.alpha * p.theta_effective_abs(0.0) * v_l
        - p.r * here;
    if p.kappa != 0.0 {
        let psi1 = p.sigma_s * s * v_ss;
        let psi2 = p.sigma_l * v_sl;
        let norm = cost_norm(0.0, psi1, psi2, p, (i, 0))?;
        rate -= side.sign() * hedging_factor(p) * p.kappa * s * norm;
    }
    Ok(rate)
}

/// Advances node `(i, 0)` by one explicit step of the reduced `L = 0` operator.
pub fn degenerate_l_row(
    v_n: &PriceSurface,
    i: usize,
    g: &Grid,
    p: &ModelParams,
    side: Side,
) -> Result<f64, PdeError> {
    Ok(v_n.get(i, 0) + g.dtau * degenerate_rate(v_n, i, g, p, side)?)
}
