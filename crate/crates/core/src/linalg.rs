// Dense square solves for the exact oracles and LSTD.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

/// Relative pivot magnitude below which a matrix is treated as singular.
pub(crate) const PIVOT_TOLERANCE: f64 = 1e-12;

/// Solves `a x = b` for a row-major `n x n` matrix.
///
/// Returns `None` when some LU pivot is below `PIVOT_TOLERANCE` times the
/// largest absolute entry of `a`.
pub(crate) fn solve(a: &[f64], n: usize, b: &[f64]) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    if n == 0 {
        return Some(Vec::new());
    }
    let m = DMatrix::from_row_slice(n, n, a);
    let scale = m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if scale == 0.0 {
        return None;
    }
    let lu = m.lu();
    let u = lu.u();
    if (0..n).any(|i| u[(i, i)].abs() <= PIVOT_TOLERANCE * scale) {
        return None;
    }
    let x = lu.solve(&DVector::from_column_slice(b))?;
    Some(x.iter().copied().collect())
}

/// `max_i |(a x - b)_i|` for a row-major square matrix.
pub(crate) fn residual_inf(a: &[f64], n: usize, x: &[f64], b: &[f64]) -> f64 {
    (0..n)
        .map(|i| {
            let row = &a[i * n..(i + 1) * n];
            let ax: f64 = row.iter().zip(x).map(|(p, q)| p * q).sum();
            (ax - b[i]).abs()
        })
        .fold(0.0, f64::max)
}
