//! Greedy sparse recovery by orthogonal matching pursuit.
//!
//! Each iteration picks the column with the largest correlation against the
//! current residual, divided by the column's selection scale (its norm unless
//! set otherwise), appends it to a thin QR factorization that
//! is updated in place (modified Gram-Schmidt with one re-orthogonalization
//! pass), and projects the residual off the new direction. Coefficients are
//! recovered once at the end by back substitution against `R`.

use crate::error::{Error, Result};

/// A dense `rows x cols` matrix stored column-major, with cached column norms.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    norms: Vec<f64>,
    selection_scale: Option<Vec<f64>>,
}

impl LinearOperator {
    /// Builds an operator from column-major data.
    pub fn from_columns(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!("operator dims {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} operator",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("operator"));
        }
        let norms = data.chunks_exact(rows).map(norm).collect();
        Ok(Self { rows, cols, data, norms, selection_scale: None })
    }

    /// Replaces the column norms as the divisor of the selection score.
    ///
    /// Rows picked out of a unit-norm dictionary keep scale 1 so that atoms
    /// with little energy on the selected rows are not boosted.
    pub fn with_selection_scale(mut self, scale: Vec<f64>) -> Result<Self> {
        if scale.len() != self.cols {
            return Err(Error::DimensionMismatch(format!("{} scales for {} columns", scale.len(), self.cols)));
        }
        if scale.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidArgument("selection scales must be positive".into()));
        }
        self.selection_scale = Some(scale);
        Ok(self)
    }

    fn selection_scale(&self, j: usize) -> f64 {
        self.selection_scale.as_ref().map_or(self.norms[j], |s| s[j])
    }

    /// Builds an operator from row-major data.
    pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} operator",
                data.len()
            )));
        }
        let mut col_major = vec![0.0; rows * cols];
        for r in 0..rows {
            for c in 0..cols {
                col_major[c * rows + r] = data[r * cols + c];
            }
        }
        Self::from_columns(rows, cols, col_major)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self::from_columns(n, n, data).expect("identity is valid")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn column_norm(&self, j: usize) -> f64 {
        self.norms[j]
    }

    /// `A x` for a dense `x` of length `cols`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                axpy(xj, self.column(j), &mut out);
            }
        }
        out
    }

    /// `A x` for a sparse code over this operator's columns.
    pub fn apply_sparse(&self, code: &SparseCode) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for (j, c) in code.iter() {
            axpy(c, self.column(j), &mut out);
        }
        out
    }
}

/// Sparse coefficient vector kept as two short parallel arrays.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseCode {
    indices: Vec<usize>,
    coefficients: Vec<f64>,
    ambient_dim: usize,
}

impl SparseCode {
    pub fn empty(ambient_dim: usize) -> Self {
        Self { indices: Vec::new(), coefficients: Vec::new(), ambient_dim }
    }

    /// Builds a code from `(index, coefficient)` pairs; indices must be unique
    /// and below `ambient_dim`.
    pub fn from_entries(ambient_dim: usize, entries: &[(usize, f64)]) -> Result<Self> {
        let mut code = Self::empty(ambient_dim);
        for &(j, c) in entries {
            if j >= ambient_dim {
                return Err(Error::InvalidArgument(format!("atom index {j} >= {ambient_dim}")));
            }
            if code.indices.contains(&j) {
                return Err(Error::InvalidArgument(format!("atom index {j} repeated")));
            }
            code.indices.push(j);
            code.coefficients.push(c);
        }
        Ok(code)
    }

    /// Keeps the non-zero entries of a dense vector, in index order.
    pub fn from_dense(dense: &[f64]) -> Self {
        let mut code = Self::empty(dense.len());
        for (j, &v) in dense.iter().enumerate() {
            if v != 0.0 {
                code.indices.push(j);
                code.coefficients.push(v);
            }
        }
        code
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.coefficients.iter().copied())
    }

    pub fn to_dense(&self) -> Result<Vec<f64>> {
        sparse_to_dense(self)
    }
}

/// Expands a sparse code to a dense vector of length `ambient_dim`.
pub fn sparse_to_dense(code: &SparseCode) -> Result<Vec<f64>> {
    let mut dense = vec![0.0; code.ambient_dim];
    for (j, c) in code.iter() {
        let slot = dense.get_mut(j).ok_or_else(|| {
            Error::InvalidArgument(format!("atom index {j} >= {}", code.ambient_dim))
        })?;
        *slot = c;
    }
    Ok(dense)
}

/// Result of one pursuit.
#[derive(Debug, Clone, PartialEq)]
pub struct OmpSolution {
    /// Selected atoms in selection order with least-squares coefficients.
    pub code: SparseCode,
    pub residual_norm: f64,
    /// Residual norm before the first and after every selection.
    pub residual_history: Vec<f64>,
}

/// Default stopping tolerance, `1e-6 * ||y||`.
pub fn default_tolerance(y: &[f64]) -> f64 {
    1e-6 * norm(y)
}

/// Relative size below which a new column is treated as lying in the span of
/// the already selected ones.
const RANK_TOL: f64 = 1e-10;

/// Orthogonal matching pursuit: approximates `y` with at most `sparsity`
/// columns of `a`.
///
/// Stops after `sparsity` selections or once the residual norm drops to
/// `residual_tol`. Ties in correlation go to the lowest column index.
pub fn omp(a: &LinearOperator, y: &[f64], sparsity: usize, residual_tol: f64) -> Result<OmpSolution> {
    if y.len() != a.rows {
        return Err(Error::DimensionMismatch(format!(
            "measurement length {} vs operator rows {}",
            y.len(),
            a.rows
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("measurement vector"));
    }
    if !(residual_tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("residual tolerance {residual_tol}")));
    }
    if sparsity == 0 || sparsity > a.rows.min(a.cols) {
        return Err(Error::InvalidArgument(format!(
            "sparsity {sparsity} outside [1, {}]",
            a.rows.min(a.cols)
        )));
    }

    let m = a.rows;
    let mut residual = y.to_vec();
    let mut residual_norm = norm(&residual);
    let mut history = vec![residual_norm];

    let mut selected: Vec<usize> = Vec::with_capacity(sparsity);
    let mut in_support = vec![false; a.cols];
    // Q stored column-major (m x k), R stored by columns (column j has j+1 entries).
    let mut q: Vec<f64> = Vec::with_capacity(m * sparsity);
    let mut r_cols: Vec<Vec<f64>> = Vec::with_capacity(sparsity);
    let mut qty: Vec<f64> = Vec::with_capacity(sparsity);
    let mut w = vec![0.0; m];

    while selected.len() < sparsity && residual_norm > residual_tol {
        let mut best: Option<(usize, f64)> = None;
        for (j, &taken) in in_support.iter().enumerate() {
            if taken || a.norms[j] == 0.0 {
                continue;
            }
            let score = dot(a.column(j), &residual).abs() / a.selection_scale(j);
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((j, score));
            }
        }
        let Some((j, score)) = best else { break };
        if score <= f64::EPSILON * residual_norm {
            break;
        }

        let col = a.column(j);
        w.copy_from_slice(col);
        let k = selected.len();
        let mut r_col = vec![0.0; k + 1];
        for _pass in 0..2 {
            for i in 0..k {
                let qi = &q[i * m..(i + 1) * m];
                let c = dot(qi, &w);
                r_col[i] += c;
                axpy(-c, qi, &mut w);
            }
        }
        let rho = norm(&w);
        if rho <= RANK_TOL * a.norms[j] {
            // Numerically dependent on the current support.
            break;
        }
        r_col[k] = rho;
        w.iter_mut().for_each(|v| *v /= rho);
        let proj = dot(&w, &residual);
        axpy(-proj, &w, &mut residual);
        q.extend_from_slice(&w);
        qty.push(dot(&w, y));
        r_cols.push(r_col);
        selected.push(j);
        in_support[j] = true;

        let new_norm = norm(&residual);
        // Projection can only shrink the residual; clamp rounding noise.
        residual_norm = new_norm.min(residual_norm);
        history.push(residual_norm);
    }

    // Back substitution R c = Q^T y.
    let k = selected.len();
    let mut coeffs = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = qty[i];
        for (jj, cj) in coeffs.iter().enumerate().skip(i + 1) {
            s -= r_cols[jj][i] * cj;
        }
        coeffs[i] = s / r_cols[i][i];
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::Numeric("non-finite least-squares coefficients".into()));
    }

    Ok(OmpSolution {
        code: SparseCode { indices: selected, coefficients: coeffs, ambient_dim: a.cols },
        residual_norm,
        residual_history: history,
    })
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
