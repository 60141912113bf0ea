//! Tridiagonal line systems and the Thomas (LU) solver.

use crate::error::PdeError;

/// Which grid line a system belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepLine {
    /// Implicit in `S` at fixed liquidity index `j`.
    S { j: usize },
    /// Implicit in `L` at fixed price index `i`.
    L { i: usize },
}

/// `lower[k]` multiplies `x[k]` in row `k + 1`; `upper[k]` multiplies `x[k + 1]` in row `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSystem {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub rhs: Vec<f64>,
    pub line: SweepLine,
}

impl SweepSystem {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `A x` for the stored matrix.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        (0..n)
            .map(|k| {
                let mut acc = self.diag[k] * x[k];
                if k > 0 {
                    acc += self.lower[k - 1] * x[k - 1];
                }
                if k + 1 < n {
                    acc += self.upper[k] * x[k + 1];
                }
                acc
            })
            .collect()
    }
}

/// Solves the system by LU factorisation without pivoting.
pub fn solve_tridiagonal(sys: &SweepSystem) -> Result<Vec<f64>, PdeError> {
    let mut x = sys.rhs.clone();
    let mut scratch = vec![0.0; x.len()];
    solve_in_place(&sys.lower, &sys.diag, &sys.upper, &mut x, &mut scratch)?;
    Ok(x)
}

/// Thomas algorithm. On entry `x` holds the right-hand side, on exit the solution.
pub fn solve_in_place(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    x: &mut [f64],
    scratch: &mut [f64],
) -> Result<(), PdeError> {
    let n = diag.len();
    debug_assert_eq!(x.len(), n);
    debug_assert!(n == 0 || (lower.len() == n - 1 && upper.len() == n - 1));
    if n == 0 {
        return Ok(());
    }
    let mut pivot = diag[0];
    if !is_usable(pivot) {
        return Err(PdeError::SingularPivot { row: 0 });
    }
    x[0] /= pivot;
    for k in 1..n {
        scratch[k - 1] = upper[k - 1] / pivot;
        pivot = diag[k] - lower[k - 1] * scratch[k - 1];
        if !is_usable(pivot) {
            return Err(PdeError::SingularPivot { row: k });
        }
        x[k] = (x[k] - lower[k - 1] * x[k - 1]) / pivot;
    }
    for k in (0..n - 1).rev() {
        x[k] -= scratch[k] * x[k + 1];
    }
    Ok(())
}

#[inline]
fn is_usable(pivot: f64) -> bool {
    pivot.is_finite() && pivot.abs() > f64::MIN_POSITIVE
}
