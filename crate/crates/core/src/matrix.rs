//! Column-major dense matrix container.

use nalgebra::DMatrix;

use crate::error::{ensure_dims, Result, RnlaError};

/// A finite real `rows × cols` matrix stored in column-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    inner: DMatrix<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { inner: DMatrix::zeros(rows, cols) }
    }

    pub fn identity(n: usize) -> Self {
        Self { inner: DMatrix::identity(n, n) }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> f64) -> Self {
        Self { inner: DMatrix::from_fn(rows, cols, f) }
    }

    /// Builds a matrix from column-major data, rejecting non-finite entries.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| RnlaError::Dimension(format!("{rows} x {cols} overflows")))?;
        ensure_dims(data.len() == len, || {
            format!("expected {len} entries for {rows} x {cols}, got {}", data.len())
        })?;
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(RnlaError::NonFinite { row: pos % rows.max(1), col: pos / rows.max(1) });
        }
        Ok(Self { inner: DMatrix::from_vec(rows, cols, data) })
    }

    /// Builds a matrix from a slice of rows (convenient in tests).
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        ensure_dims(rows.iter().all(|r| r.len() == n), || "ragged rows".to_string())?;
        let mut data = Vec::with_capacity(m * n);
        for j in 0..n {
            for r in rows {
                data.push(r[j]);
            }
        }
        Self::from_col_major(m, n, data)
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { 0.0 })
    }

    /// A single column vector.
    pub fn column_vector(v: &[f64]) -> Self {
        Self { inner: DMatrix::from_column_slice(v.len(), 1, v) }
    }

    pub fn from_columns(cols: &[Vec<f64>], rows: usize) -> Result<Self> {
        ensure_dims(cols.iter().all(|c| c.len() == rows), || "column length mismatch".to_string())?;
        let mut data = Vec::with_capacity(rows * cols.len());
        for c in cols {
            data.extend_from_slice(c);
        }
        Self::from_col_major(rows, cols.len(), data)
    }

    pub(crate) fn from_nalgebra(inner: DMatrix<f64>) -> Self {
        Self { inner }
    }

    pub fn as_nalgebra(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn into_nalgebra(self) -> DMatrix<f64> {
        self.inner
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.inner.shape()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// Column-major entries.
    pub fn as_slice(&self) -> &[f64] {
        self.inner.as_slice()
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        self.inner.as_mut_slice()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.inner[(i, j)] = v;
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let m = self.rows();
        &self.as_slice()[j * m..(j + 1) * m]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [f64] {
        let m = self.rows();
        &mut self.as_mut_slice()[j * m..(j + 1) * m]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols()).map(|j| self.get(i, j)).collect()
    }

    pub fn columns(&self, idx: &[usize]) -> DenseMatrix {
        Self::from_fn(self.rows(), idx.len(), |i, j| self.get(i, idx[j]))
    }

    /// First `k` columns.
    pub fn leading_columns(&self, k: usize) -> DenseMatrix {
        Self { inner: self.inner.columns(0, k).into_owned() }
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> DenseMatrix {
        Self::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]))
    }

    pub fn transpose(&self) -> DenseMatrix {
        Self { inner: self.inner.transpose() }
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        ensure_dims(self.cols() == other.rows(), || {
            format!("cannot multiply {:?} by {:?}", self.shape(), other.shape())
        })?;
        Ok(Self { inner: &self.inner * &other.inner })
    }

    /// `selfᵀ · other`
    pub fn tr_matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        ensure_dims(self.rows() == other.rows(), || {
            format!("cannot multiply transpose of {:?} by {:?}", self.shape(), other.shape())
        })?;
        Ok(Self { inner: self.inner.tr_mul(&other.inner) })
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols(), "matvec dimension mismatch");
        let mut y = vec![0.0; self.rows()];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                for (yi, aij) in y.iter_mut().zip(self.column(j)) {
                    *yi += aij * xj;
                }
            }
        }
        y
    }

    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows(), "matvec_t dimension mismatch");
        (0..self.cols()).map(|j| dot(self.column(j), x)).collect()
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        ensure_dims(self.shape() == other.shape(), || "shape mismatch in add".to_string())?;
        Ok(Self { inner: &self.inner + &other.inner })
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        ensure_dims(self.shape() == other.shape(), || "shape mismatch in sub".to_string())?;
        Ok(Self { inner: &self.inner - &other.inner })
    }

    pub fn scale(&self, alpha: f64) -> DenseMatrix {
        Self { inner: &self.inner * alpha }
    }

    /// `self += alpha * x yᵀ`
    pub fn rank_one_update(&mut self, alpha: f64, x: &[f64], y: &[f64]) {
        assert_eq!(x.len(), self.rows());
        assert_eq!(y.len(), self.cols());
        for (j, &yj) in y.iter().enumerate() {
            let c = alpha * yj;
            if c != 0.0 {
                for (a, &xi) in self.column_mut(j).iter_mut().zip(x) {
                    *a += c * xi;
                }
            }
        }
    }

    pub fn add_scaled_identity(&self, mu: f64) -> DenseMatrix {
        let mut out = self.clone();
        for i in 0..self.rows().min(self.cols()) {
            out.set(i, i, out.get(i, i) + mu);
        }
        out
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows().min(self.cols())).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(self.as_slice())
    }

    pub fn max_abs(&self) -> f64 {
        self.as_slice().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest entrywise deviation from symmetry.
    pub fn asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in (j + 1)..n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn symmetrize(&self) -> DenseMatrix {
        Self::from_fn(self.rows(), self.cols(), |i, j| 0.5 * (self.get(i, j) + self.get(j, i)))
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|v| v.is_finite())
    }
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale_in_place(alpha: f64, x: &mut [f64]) {
    for v in x {
        *v *= alpha;
    }
}

pub fn sub_vec(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}
