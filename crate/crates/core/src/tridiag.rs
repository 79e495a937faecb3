//! Thomas algorithm for tridiagonal systems.

use crate::error::{Error, Result};

/// Solves `A x = rhs` where `A` has sub-diagonal `lower`, diagonal `diag` and
/// super-diagonal `upper` (`lower[i]` couples row `i + 1` to column `i`).
///
/// No pivoting: intended for diagonally dominant systems. A vanishing pivot
/// is reported as singular.
pub(crate) fn solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    assert!(n > 0 && lower.len() + 1 == n && upper.len() + 1 == n && rhs.len() == n);
    let scale = diag.iter().chain(lower).chain(upper).fold(0.0f64, |m, v| m.max(v.abs()));
    let tiny = scale * 1e-14;

    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    for i in 0..n {
        if i > 0 {
            pivot = diag[i] - lower[i - 1] * c[i - 1];
        }
        if pivot.abs() <= tiny {
            return Err(Error::Singular(format!("zero pivot in row {i}")));
        }
        if i + 1 < n {
            c[i] = upper[i] / pivot;
        }
        d[i] = if i == 0 { rhs[0] / pivot } else { (rhs[i] - lower[i - 1] * d[i - 1]) / pivot };
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}
