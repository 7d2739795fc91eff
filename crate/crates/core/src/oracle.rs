//! Access models: matrices seen only through products, and psd matrices
//! seen only through individual entries. Both count what they are asked.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{ensure_dims, Result, RnlaError};
use crate::matrix::{dot, DenseMatrix};

/// A linear map `ℝⁿ → ℝᵐ` with its adjoint.
pub trait LinearOperator: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `y = A x`
    fn apply_into(&self, x: &[f64], y: &mut [f64]);
    /// `y = Aᵀ x`
    fn apply_adjoint_into(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for DenseMatrix {
    fn nrows(&self) -> usize {
        self.rows()
    }

    fn ncols(&self) -> usize {
        self.cols()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        y.fill(0.0);
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                for (yi, aij) in y.iter_mut().zip(self.column(j)) {
                    *yi += aij * xj;
                }
            }
        }
    }

    fn apply_adjoint_into(&self, x: &[f64], y: &mut [f64]) {
        for (j, yj) in y.iter_mut().enumerate() {
            *yj = dot(self.column(j), x);
        }
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }
    fn ncols(&self) -> usize {
        (**self).ncols()
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply_into(x, y)
    }
    fn apply_adjoint_into(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply_adjoint_into(x, y)
    }
}

type VecFn<'a> = Box<dyn Fn(&[f64]) -> Vec<f64> + Sync + 'a>;

struct FnOperator<'a> {
    rows: usize,
    cols: usize,
    apply: VecFn<'a>,
    adjoint: VecFn<'a>,
}

impl LinearOperator for FnOperator<'_> {
    fn nrows(&self) -> usize {
        self.rows
    }
    fn ncols(&self) -> usize {
        self.cols
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(&(self.apply)(x));
    }
    fn apply_adjoint_into(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(&(self.adjoint)(x));
    }
}

/// Matvec-only access to an `m × n` matrix. Every call to [`apply`] or
/// [`apply_adjoint`] costs one matvec.
///
/// [`apply`]: MatVecOracle::apply
/// [`apply_adjoint`]: MatVecOracle::apply_adjoint
pub struct MatVecOracle<'a> {
    op: Box<dyn LinearOperator + 'a>,
    count: AtomicU64,
}

impl<'a> MatVecOracle<'a> {
    pub fn new(op: impl LinearOperator + 'a) -> Self {
        Self { op: Box::new(op), count: AtomicU64::new(0) }
    }

    pub fn from_dense(a: &'a DenseMatrix) -> Self {
        Self::new(a)
    }

    /// Oracle from a pair of closures `x ↦ Ax`, `y ↦ Aᵀy`.
    pub fn from_fns(
        rows: usize,
        cols: usize,
        apply: impl Fn(&[f64]) -> Vec<f64> + Sync + 'a,
        adjoint: impl Fn(&[f64]) -> Vec<f64> + Sync + 'a,
    ) -> Self {
        Self::new(FnOperator { rows, cols, apply: Box::new(apply), adjoint: Box::new(adjoint) })
    }

    pub fn rows(&self) -> usize {
        self.op.nrows()
    }

    pub fn cols(&self) -> usize {
        self.op.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols(), "oracle apply dimension mismatch");
        self.count.fetch_add(1, Ordering::Relaxed);
        let mut y = vec![0.0; self.rows()];
        self.op.apply_into(x, &mut y);
        y
    }

    pub fn apply_adjoint(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows(), "oracle adjoint dimension mismatch");
        self.count.fetch_add(1, Ordering::Relaxed);
        let mut y = vec![0.0; self.cols()];
        self.op.apply_adjoint_into(x, &mut y);
        y
    }

    /// `A X`, one matvec per column of `X`.
    pub fn apply_matrix(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        ensure_dims(x.rows() == self.cols(), || {
            format!("oracle has {} columns, block has {} rows", self.cols(), x.rows())
        })?;
        let cols: Vec<Vec<f64>> = (0..x.cols()).map(|j| self.apply(x.column(j))).collect();
        DenseMatrix::from_columns(&cols, self.rows())
    }

    /// `Aᵀ Y`, one matvec per column of `Y`.
    pub fn apply_adjoint_matrix(&self, y: &DenseMatrix) -> Result<DenseMatrix> {
        ensure_dims(y.rows() == self.rows(), || {
            format!("oracle has {} rows, block has {} rows", self.rows(), y.rows())
        })?;
        let cols: Vec<Vec<f64>> = (0..y.cols()).map(|j| self.apply_adjoint(y.column(j))).collect();
        DenseMatrix::from_columns(&cols, self.cols())
    }

    pub fn matvec_count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }

    pub fn reset_count(&self) {
        self.count.store(0, Ordering::Relaxed);
    }
}

type EntryFn<'a> = Box<dyn Fn(usize, usize) -> f64 + Sync + 'a>;

/// Pay-per-entry access to a symmetric `n × n` matrix.
pub struct EntryOracle<'a> {
    dim: usize,
    entry: EntryFn<'a>,
    count: AtomicU64,
}

impl<'a> EntryOracle<'a> {
    /// The closure must be symmetric in its arguments.
    pub fn from_fn(dim: usize, entry: impl Fn(usize, usize) -> f64 + Sync + 'a) -> Self {
        Self { dim, entry: Box::new(entry), count: AtomicU64::new(0) }
    }

    /// Wraps a dense symmetric matrix; asymmetry beyond `1e-10 · max|a|`
    /// is rejected.
    pub fn from_dense(a: &'a DenseMatrix) -> Result<Self> {
        ensure_dims(a.is_square(), || format!("entry oracle needs a square matrix, got {:?}", a.shape()))?;
        let asym = a.asymmetry();
        if asym > 1e-10 * a.max_abs().max(1.0) {
            return Err(RnlaError::NotSymmetric(asym));
        }
        Ok(Self::from_fn(a.rows(), move |i, j| a.get(i, j)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, j: usize, k: usize) -> f64 {
        self.count.fetch_add(1, Ordering::Relaxed);
        (self.entry)(j, k)
    }

    /// Full diagonal; costs `n` evaluations.
    pub fn diag(&self) -> Vec<f64> {
        self.count.fetch_add(self.dim as u64, Ordering::Relaxed);
        (0..self.dim).map(|j| (self.entry)(j, j)).collect()
    }

    /// Column `k`; costs `n` evaluations.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.count.fetch_add(self.dim as u64, Ordering::Relaxed);
        (0..self.dim).map(|j| (self.entry)(j, k)).collect()
    }

    /// Every entry; costs `n²` evaluations.
    pub fn to_dense(&self) -> DenseMatrix {
        self.count.fetch_add((self.dim * self.dim) as u64, Ordering::Relaxed);
        DenseMatrix::from_fn(self.dim, self.dim, |i, j| (self.entry)(i, j))
    }

    pub fn entry_eval_count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }

    pub fn reset_count(&self) {
        self.count.store(0, Ordering::Relaxed);
    }
}
