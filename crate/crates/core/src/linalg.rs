//! Dense linear maps and the handful of small dense kernels the solvers need.
//!
//! Stalks are tiny at the scales this crate targets, so everything here is
//! dense. Heavier factorizations (SVD, Cholesky) go through `nalgebra`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SheafError};

/// A dense real matrix stored row-major, used for restriction maps.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl LinearMap {
    /// Builds a map from row-major entries. Shapes must be positive and all
    /// entries finite.
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(SheafError::InvalidMap(format!("shape {rows}x{cols} has a zero side")));
        }
        if entries.len() != rows * cols {
            return Err(SheafError::InvalidMap(format!(
                "{rows}x{cols} map needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(pos) = entries.iter().position(|v| !v.is_finite()) {
            return Err(SheafError::InvalidMap(format!("entry {pos} is not finite")));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, 1.0)
    }

    /// `c` times the `n x n` identity.
    pub fn scalar(n: usize, c: f64) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = c;
        }
        Self {
            rows: n,
            cols: n,
            entries,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![0.0; rows * cols],
        }
    }

    pub fn from_dmatrix(m: &DMatrix<f64>) -> Self {
        let (rows, cols) = m.shape();
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(m[(r, c)]);
            }
        }
        Self { rows, cols, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.cols + c]
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.entries)
    }

    /// `A x`. Panics if `x.len() != cols`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "LinearMap::apply length");
        self.entries
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Accumulates `scale * A^T y` into `out`.
    pub fn apply_transpose_into(&self, y: &[f64], scale: f64, out: &mut [f64]) {
        assert_eq!(y.len(), self.rows, "LinearMap::apply_transpose length");
        assert_eq!(out.len(), self.cols, "LinearMap::apply_transpose output length");
        for (row, &yr) in self.entries.chunks_exact(self.cols).zip(y) {
            let s = scale * yr;
            for (o, a) in out.iter_mut().zip(row) {
                *o += s * a;
            }
        }
    }

    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        self.apply_transpose_into(y, 1.0, &mut out);
        out
    }

    /// `A^T B` for maps sharing a row count.
    pub fn transpose_mul(&self, other: &LinearMap) -> DMatrix<f64> {
        assert_eq!(self.rows, other.rows, "transpose_mul row counts");
        self.to_dmatrix().transpose() * other.to_dmatrix()
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        let s = self.to_dmatrix().singular_values();
        s.iter().cloned().fold(0.0, f64::max)
    }

    pub fn transpose(&self) -> LinearMap {
        let mut entries = Vec::with_capacity(self.entries.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                entries.push(self.get(r, c));
            }
        }
        LinearMap {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }
}

/// Singular values and full right-singular basis of a dense matrix.
///
/// Wide matrices are zero-padded to square so that `v_t` always spans the
/// whole domain; the padding contributes zero singular values only.
pub(crate) struct FullSvd {
    pub singular_values: Vec<f64>,
    /// Rows are right singular vectors, aligned with `singular_values`.
    pub v_t: DMatrix<f64>,
}

pub(crate) fn full_svd(m: &DMatrix<f64>) -> FullSvd {
    let (rows, cols) = m.shape();
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    FullSvd {
        singular_values: svd.singular_values.iter().cloned().collect(),
        v_t,
    }
}

/// Numerical rank with singular values below `rel_tol * sigma_max` treated as zero.
pub(crate) fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let s = m.singular_values();
    let smax = s.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > rel_tol * smax).count()
}

/// Minimum-norm least-squares solution of `A x = b`.
pub(crate) fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if a.nrows() == 0 {
        return DVector::zeros(a.ncols());
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = (smax * 1e-12).max(f64::MIN_POSITIVE);
    svd.solve(b, eps).expect("U and V^T were requested")
}

/// Solves the symmetric positive semidefinite system `A u = b`.
///
/// Uses Cholesky when `A` is definite. When it is singular the solution
/// closest to `anchor` is returned.
pub(crate) fn solve_psd_near(a: &DMatrix<f64>, b: &DVector<f64>, anchor: &DVector<f64>) -> DVector<f64> {
    if let Some(ch) = a.clone().cholesky() {
        return ch.solve(b);
    }
    let r = b - a * anchor;
    anchor + lstsq(a, &r)
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, a| m.max(a.abs()))
}
