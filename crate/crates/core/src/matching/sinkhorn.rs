//! Alternating row/column normalization.
//!
//! Square matrices get classic Sinkhorn scaling toward a doubly stochastic
//! matrix. For rectangular matrices the smaller dimension is normalized to
//! sum 1 while sums along the longer dimension are only capped at 1, which
//! is the relaxation of a partial injective matching.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Outcome of one normalization run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornReport {
    /// Full passes performed (one pass = rows then columns).
    pub iterations: usize,
    /// Largest entry change during the last pass. Convergence requires this
    /// and the marginal residuals to fall below the tolerance.
    pub last_change: f64,
    pub converged: bool,
}

/// Returns a normalized copy of `m`.
pub fn sinkhorn_normalize(m: &Array2<f64>, tol: f64, max_iters: usize) -> Result<Array2<f64>> {
    let mut out = m.as_standard_layout().into_owned();
    let (rows, cols) = out.dim();
    let data = out.as_slice_mut().expect("standard layout");
    sinkhorn_in_place(data, rows, cols, tol, max_iters)?;
    Ok(out)
}

/// Normalizes a row-major `rows x cols` buffer in place.
pub fn sinkhorn_in_place(
    m: &mut [f64],
    rows: usize,
    cols: usize,
    tol: f64,
    max_iters: usize,
) -> Result<SinkhornReport> {
    sinkhorn_core(m, rows, cols, tol, max_iters, None)
}

/// Like [`sinkhorn_in_place`], adding the natural log of every applied row
/// and column factor to `log_row` / `log_col`.
pub fn sinkhorn_in_place_logged(
    m: &mut [f64],
    rows: usize,
    cols: usize,
    tol: f64,
    max_iters: usize,
    log_row: &mut [f64],
    log_col: &mut [f64],
) -> Result<SinkhornReport> {
    assert!(log_row.len() == rows && log_col.len() == cols);
    sinkhorn_core(m, rows, cols, tol, max_iters, Some((log_row, log_col)))
}

fn sinkhorn_core(
    m: &mut [f64],
    rows: usize,
    cols: usize,
    tol: f64,
    max_iters: usize,
    mut logs: Option<(&mut [f64], &mut [f64])>,
) -> Result<SinkhornReport> {
    assert_eq!(m.len(), rows * cols, "buffer does not match shape");
    if rows == 0 || cols == 0 {
        return Err(Error::Degenerate("empty matrix".into()));
    }
    if m.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::NonFinite("sinkhorn input"));
    }
    for r in 0..rows {
        if m[r * cols..(r + 1) * cols].iter().all(|&x| x == 0.0) {
            return Err(Error::Degenerate(format!("row {r} is all zero")));
        }
    }
    for c in 0..cols {
        if (0..rows).all(|r| m[r * cols + c] == 0.0) {
            return Err(Error::Degenerate(format!("column {c} is all zero")));
        }
    }

    // the longer dimension is only capped
    let cap_rows = rows > cols;
    let cap_cols = cols > rows;
    let mut prev = m.to_vec();
    let mut col_sums = vec![0.0; cols];
    let mut report = SinkhornReport {
        iterations: 0,
        last_change: f64::INFINITY,
        converged: false,
    };

    while report.iterations < max_iters {
        for (r, row) in m.chunks_exact_mut(cols).enumerate() {
            let s: f64 = row.iter().sum();
            if !cap_rows || s > 1.0 {
                let inv = 1.0 / s;
                row.iter_mut().for_each(|x| *x *= inv);
                if let Some((lr, _)) = logs.as_mut() {
                    lr[r] -= s.ln();
                }
            }
        }
        col_sums.iter_mut().for_each(|s| *s = 0.0);
        for row in m.chunks_exact(cols) {
            for (s, x) in col_sums.iter_mut().zip(row) {
                *s += x;
            }
        }
        for (c, s) in col_sums.iter_mut().enumerate() {
            if !cap_cols || *s > 1.0 {
                if let Some((_, lc)) = logs.as_mut() {
                    lc[c] -= s.ln();
                }
                *s = 1.0 / *s;
            } else {
                *s = 1.0;
            }
        }
        for row in m.chunks_exact_mut(cols) {
            for (x, inv) in row.iter_mut().zip(&col_sums) {
                *x *= inv;
            }
        }

        let mut change = 0.0f64;
        for (x, p) in m.iter().zip(prev.iter_mut()) {
            change = change.max((x - *p).abs());
            *p = *x;
        }
        report.iterations += 1;
        report.last_change = change;
        if !change.is_finite() {
            return Err(Error::Degenerate(
                "normalization produced non-finite entries".into(),
            ));
        }
        if change < tol {
            let (r, c) = marginal_residuals(m, rows, cols);
            if r.max(c) < tol {
                report.converged = true;
                break;
            }
        }
    }
    Ok(report)
}

/// Worst deviation from the normalization targets: for the smaller (or
/// equal) dimension `|sum - 1|`, for the longer one `max(sum - 1, 0)`.
/// Returns `(row_residual, col_residual)`.
pub fn marginal_residuals(m: &[f64], rows: usize, cols: usize) -> (f64, f64) {
    let row_res = m
        .chunks_exact(cols)
        .map(|r| {
            let s: f64 = r.iter().sum();
            if rows > cols {
                (s - 1.0).max(0.0)
            } else {
                (s - 1.0).abs()
            }
        })
        .fold(0.0, f64::max);
    let col_res = (0..cols)
        .map(|c| {
            let s: f64 = (0..rows).map(|r| m[r * cols + c]).sum();
            if cols > rows {
                (s - 1.0).max(0.0)
            } else {
                (s - 1.0).abs()
            }
        })
        .fold(0.0, f64::max);
    (row_res, col_res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn uniform_two_by_two() {
        let out = sinkhorn_normalize(&array![[1.0, 1.0], [1.0, 1.0]], 1e-12, 30).unwrap();
        assert_eq!(out, array![[0.5, 0.5], [0.5, 0.5]]);
    }

    #[test]
    fn diagonal_dominant_converges() {
        let m = array![[1.0, 0.0001], [0.0001, 1.0]];
        let out = sinkhorn_normalize(&m, 1e-9, 100).unwrap();
        let (r, c) = marginal_residuals(out.as_slice().unwrap(), 2, 2);
        assert!(r < 1e-9 && c < 1e-9);
        assert!(out[[0, 0]] > 0.999 && out[[1, 1]] > 0.999);
    }

    #[test]
    fn single_row_only_row_normalizes() {
        let out = sinkhorn_normalize(&array![[2.0, 1.0, 1.0]], 1e-12, 30).unwrap();
        assert_eq!(out, array![[0.5, 0.25, 0.25]]);
    }

    #[test]
    fn zero_row_is_rejected() {
        assert!(matches!(
            sinkhorn_normalize(&array![[0.0, 0.0], [1.0, 1.0]], 1e-6, 30),
            Err(Error::Degenerate(_))
        ));
        assert!(sinkhorn_normalize(&array![[0.0, 1.0], [0.0, 1.0]], 1e-6, 30).is_err());
        assert!(sinkhorn_normalize(&array![[f64::NAN, 1.0]], 1e-6, 30).is_err());
    }

    #[test]
    fn stops_at_iteration_cap() {
        let mut m = vec![1.0, 1e-3, 1e-3, 1.0, 1.0, 1e-3, 1e-3, 1e-3, 1.0];
        let rep = sinkhorn_in_place(&mut m, 3, 3, 0.0, 5).unwrap();
        assert_eq!(rep.iterations, 5);
        assert!(!rep.converged);
    }

    proptest! {
        #[test]
        fn square_marginals_within_tol(n in 1usize..7, seed in prop::collection::vec(0.01f64..10.0, 49)) {
            let mut m: Vec<f64> = seed[..n * n].to_vec();
            let rep = sinkhorn_in_place(&mut m, n, n, 1e-10, 10_000).unwrap();
            prop_assert!(rep.converged);
            let (r, c) = marginal_residuals(&m, n, n);
            prop_assert!(r < 1e-6 && c < 1e-12, "r={} c={}", r, c);
        }

        #[test]
        fn rectangular_respects_caps(rows in 1usize..6, cols in 1usize..6, seed in prop::collection::vec(0.01f64..10.0, 36)) {
            let mut m: Vec<f64> = seed[..rows * cols].to_vec();
            sinkhorn_in_place(&mut m, rows, cols, 1e-10, 10_000).unwrap();
            let (r, c) = marginal_residuals(&m, rows, cols);
            prop_assert!(r < 1e-6 && c < 1e-6, "r={} c={}", r, c);
        }
    }
}
