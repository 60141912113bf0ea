#![allow(dead_code)]

use std::path::PathBuf;

use statrs::distribution::{ContinuousCDF, Normal};

/// Black-Scholes European put.
pub fn bs_put(s: f64, k: f64, r: f64, sigma: f64, t: f64) -> f64 {
    let n = Normal::new(0.0, 1.0).unwrap();
    let sd = sigma * t.sqrt();
    let d1 = ((s / k).ln() + (r + 0.5 * sigma * sigma) * t) / sd;
    let d2 = d1 - sd;
    k * (-r * t).exp() * n.cdf(-d2) - s * n.cdf(-d1)
}

/// Kalman filter for `x' = F x + w`, `y = x_0 + v`, written with plain
/// arrays. `q(x)` gives the noise covariance for a step started at `x`.
pub struct LinearKalman<Q: Fn([f64; 2]) -> [[f64; 2]; 2]> {
    pub f: [[f64; 2]; 2],
    pub c: [f64; 2],
    pub q: Q,
    pub r: f64,
}

impl<Q: Fn([f64; 2]) -> [[f64; 2]; 2]> LinearKalman<Q> {
    /// Negative log-likelihood of `y[1..]`, with `x0, p0` the state at `y[0]`.
    pub fn neg_loglik(&self, y: &[f64], x0: [f64; 2], p0: [[f64; 2]; 2]) -> f64 {
        let (f, c) = (self.f, self.c);
        let mut x = x0;
        let mut p = p0;
        let mut ll = 0.0;
        for &obs in &y[1..] {
            let q = (self.q)(x);
            let xp = [
                f[0][0] * x[0] + f[0][1] * x[1] + c[0],
                f[1][0] * x[0] + f[1][1] * x[1] + c[1],
            ];
            // F P F^T + Q
            let fp = [
                [
                    f[0][0] * p[0][0] + f[0][1] * p[1][0],
                    f[0][0] * p[0][1] + f[0][1] * p[1][1],
                ],
                [
                    f[1][0] * p[0][0] + f[1][1] * p[1][0],
                    f[1][0] * p[0][1] + f[1][1] * p[1][1],
                ],
            ];
            let mut pp = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    pp[i][j] = fp[i][0] * f[j][0] + fp[i][1] * f[j][1] + q[i][j];
                }
            }
            let v = pp[0][0] + self.r;
            let e = obs - xp[0];
            ll += -0.5 * ((2.0 * std::f64::consts::PI).ln() + v.ln() + e * e / v);
            let k = [pp[0][0] / v, pp[1][0] / v];
            x = [xp[0] + k[0] * e, xp[1] + k[1] * e];
            p = [
                [pp[0][0] - k[0] * pp[0][0], pp[0][1] - k[0] * pp[0][1]],
                [pp[1][0] - k[1] * pp[0][0], pp[1][1] - k[1] * pp[0][1]],
            ];
        }
        -ll
    }
}

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}
