//! Dense factorizations used as exact kernels by the randomized algorithms.
//!
//! SVD and symmetric eigendecomposition come from nalgebra; Householder QR
//! with column pivoting is implemented here because the randomized methods
//! need the permutation and the numerical rank explicitly.

use nalgebra::{DMatrix, SymmetricEigen, SVD};

use crate::error::{ensure_dims, Result, RnlaError};
use crate::matrix::{dot, DenseMatrix};

/// Thin SVD `A = U diag(s) Vᵀ` with singular values in decreasing order.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: DenseMatrix,
    pub s: Vec<f64>,
    pub v: DenseMatrix,
}

pub fn svd(a: &DenseMatrix) -> Svd {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Svd { u: DenseMatrix::zeros(m, 0), s: vec![], v: DenseMatrix::zeros(n, 0) };
    }
    let dec = SVD::new(a.as_nalgebra().clone(), true, true);
    let u = dec.u.expect("u requested");
    let vt = dec.v_t.expect("v_t requested");
    let sv = dec.singular_values;
    let k = sv.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    let u = DMatrix::from_fn(m, k, |i, j| u[(i, order[j])]);
    let v = DMatrix::from_fn(n, k, |i, j| vt[(order[j], i)]);
    Svd {
        u: DenseMatrix::from_nalgebra(u),
        s: order.iter().map(|&i| sv[i]).collect(),
        v: DenseMatrix::from_nalgebra(v),
    }
}

pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return vec![];
    }
    let mut s: Vec<f64> = a.as_nalgebra().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn spectral_norm(a: &DenseMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Symmetric eigendecomposition with eigenvalues in decreasing order.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

pub fn sym_eigen(a: &DenseMatrix) -> Result<SymEigen> {
    ensure_dims(a.is_square(), || format!("eigendecomposition of non-square {:?}", a.shape()))?;
    let n = a.rows();
    if n == 0 {
        return Ok(SymEigen { values: vec![], vectors: DenseMatrix::zeros(0, 0) });
    }
    let dec = SymmetricEigen::new(a.symmetrize().into_nalgebra());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| dec.eigenvalues[j].total_cmp(&dec.eigenvalues[i]));
    let vectors = DMatrix::from_fn(n, n, |i, j| dec.eigenvectors[(i, order[j])]);
    Ok(SymEigen {
        values: order.iter().map(|&i| dec.eigenvalues[i]).collect(),
        vectors: DenseMatrix::from_nalgebra(vectors),
    })
}

pub fn sym_eigenvalues(a: &DenseMatrix) -> Result<Vec<f64>> {
    ensure_dims(a.is_square(), || format!("eigenvalues of non-square {:?}", a.shape()))?;
    if a.rows() == 0 {
        return Ok(vec![]);
    }
    let mut v: Vec<f64> =
        a.symmetrize().into_nalgebra().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|x, y| y.total_cmp(x));
    Ok(v)
}

/// Householder QR with column pivoting: `A P = Q R`.
#[derive(Clone, Debug)]
pub struct PivotedQr {
    /// `m × k` with orthonormal columns, `k = min(m, n)`.
    pub q: DenseMatrix,
    /// `k × n` upper trapezoidal.
    pub r: DenseMatrix,
    /// Column `j` of `A P` is column `perm[j]` of `A`.
    pub perm: Vec<usize>,
    /// Number of diagonal entries of `R` above the rank cutoff.
    pub rank: usize,
}

impl PivotedQr {
    /// Solves `min ‖A x − b‖` using the leading `rank` block of `R`.
    pub fn solve_least_squares(&self, b: &[f64]) -> Vec<f64> {
        let n = self.perm.len();
        let rank = self.rank;
        let qtb: Vec<f64> = (0..rank).map(|j| dot(self.q.column(j), b)).collect();
        let z = solve_upper_block(&self.r, rank, &qtb);
        let mut x = vec![0.0; n];
        for (j, zj) in z.into_iter().enumerate() {
            x[self.perm[j]] = zj;
        }
        x
    }

    /// Leading `rank × rank` block of `R`.
    pub fn r_leading(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.rank, self.rank, |i, j| self.r.get(i, j))
    }
}

/// Column-pivoted Householder QR. Columns whose pivot falls below
/// `rel_tol · |R₀₀|` are counted as numerically dependent.
pub fn pivoted_qr(a: &DenseMatrix, rel_tol: f64) -> PivotedQr {
    let (m, n) = a.shape();
    let k = m.min(n);
    let mut w = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut reflectors: Vec<(Vec<f64>, f64)> = Vec::with_capacity(k);

    for j in 0..k {
        // pick the remaining column with the largest trailing norm
        let mut best = j;
        let mut best_norm = -1.0;
        for c in j..n {
            let col = &w.column(c)[j..];
            let nrm = dot(col, col);
            if nrm > best_norm {
                best_norm = nrm;
                best = c;
            }
        }
        if best != j {
            for i in 0..m {
                let t = w.get(i, j);
                w.set(i, j, w.get(i, best));
                w.set(i, best, t);
            }
            perm.swap(j, best);
        }

        let x: Vec<f64> = w.column(j)[j..].to_vec();
        let norm_x = dot(&x, &x).sqrt();
        if norm_x == 0.0 {
            reflectors.push((vec![0.0; m - j], 0.0));
            continue;
        }
        let alpha = if x[0] >= 0.0 { -norm_x } else { norm_x };
        let mut v = x;
        v[0] -= alpha;
        let vtv = dot(&v, &v);
        let beta = if vtv > 0.0 { 2.0 / vtv } else { 0.0 };
        for c in j..n {
            let col = &mut w.column_mut(c)[j..];
            let s = beta * dot(&v, col);
            if s != 0.0 {
                for (ci, vi) in col.iter_mut().zip(&v) {
                    *ci -= s * vi;
                }
            }
        }
        // clean the subdiagonal
        w.set(j, j, alpha);
        for i in (j + 1)..m {
            w.set(i, j, 0.0);
        }
        reflectors.push((v, beta));
    }

    let r = DenseMatrix::from_fn(k, n, |i, j| if i <= j { w.get(i, j) } else { 0.0 });

    let mut q = DenseMatrix::from_fn(m, k, |i, j| if i == j { 1.0 } else { 0.0 });
    for (j, (v, beta)) in reflectors.iter().enumerate().rev() {
        if *beta == 0.0 {
            continue;
        }
        for c in 0..k {
            let col = &mut q.column_mut(c)[j..];
            let s = beta * dot(v, col);
            if s != 0.0 {
                for (ci, vi) in col.iter_mut().zip(v) {
                    *ci -= s * vi;
                }
            }
        }
    }

    let r00 = if k > 0 { r.get(0, 0).abs() } else { 0.0 };
    let rank = if r00 == 0.0 {
        0
    } else {
        (0..k).take_while(|&i| r.get(i, i).abs() > rel_tol * r00).count()
    };
    PivotedQr { q, r, perm, rank }
}

/// Orthonormal basis for `range(Y)`, dropping directions below
/// `rel_tol · ‖Y‖` (pivoted QR).
pub fn orth(y: &DenseMatrix, rel_tol: f64) -> DenseMatrix {
    let qr = pivoted_qr(y, rel_tol);
    qr.q.leading_columns(qr.rank)
}

/// Plain Householder QR (no pivoting), thin factors.
pub fn qr(a: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let dec = a.as_nalgebra().clone().qr();
    (DenseMatrix::from_nalgebra(dec.q()), DenseMatrix::from_nalgebra(dec.r()))
}

/// Solves `R[..k, ..k] z = b` for the leading upper-triangular block.
pub fn solve_upper_block(r: &DenseMatrix, k: usize, b: &[f64]) -> Vec<f64> {
    let mut z = b[..k].to_vec();
    for i in (0..k).rev() {
        let mut acc = z[i];
        for (j, zj) in z.iter().enumerate().take(k).skip(i + 1) {
            acc -= r.get(i, j) * zj;
        }
        z[i] = acc / r.get(i, i);
    }
    z
}

pub fn solve_upper(r: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    solve_upper_block(r, r.cols(), b)
}

/// Solves `Rᵀ z = b` for square upper-triangular `R`.
pub fn solve_upper_transpose(r: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let k = r.cols();
    let mut z = b[..k].to_vec();
    for i in 0..k {
        let mut acc = z[i];
        for (j, zj) in z.iter().enumerate().take(i) {
            acc -= r.get(j, i) * zj;
        }
        z[i] = acc / r.get(i, i);
    }
    z
}

/// Minimum-norm least-squares solution through the SVD.
pub fn lstsq_svd(a: &DenseMatrix, b: &[f64], rel_cutoff: f64) -> Vec<f64> {
    let dec = svd(a);
    let smax = dec.s.first().copied().unwrap_or(0.0);
    let mut x = vec![0.0; a.cols()];
    for (j, &sj) in dec.s.iter().enumerate() {
        if sj > rel_cutoff * smax && sj > 0.0 {
            let coef = dot(dec.u.column(j), b) / sj;
            for (xi, vi) in x.iter_mut().zip(dec.v.column(j)) {
                *xi += coef * vi;
            }
        }
    }
    x
}

/// Moore–Penrose pseudoinverse through the SVD, discarding singular values
/// below `rel_cutoff · σ₁`.
pub fn pinv(a: &DenseMatrix, rel_cutoff: f64) -> DenseMatrix {
    let dec = svd(a);
    let smax = dec.s.first().copied().unwrap_or(0.0);
    let mut out = DenseMatrix::zeros(a.cols(), a.rows());
    for (j, &sj) in dec.s.iter().enumerate() {
        if sj > rel_cutoff * smax && sj > 0.0 {
            out.rank_one_update(1.0 / sj, dec.v.column(j), dec.u.column(j));
        }
    }
    out
}

/// Pseudoinverse of a symmetric matrix, discarding eigenvalues with
/// magnitude below `rel_cutoff · ‖A‖`.
pub fn pinv_sym(a: &DenseMatrix, rel_cutoff: f64) -> Result<DenseMatrix> {
    let eig = sym_eigen(a)?;
    let n = a.rows();
    let scale = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut out = DenseMatrix::zeros(n, n);
    for (j, &lam) in eig.values.iter().enumerate() {
        if lam.abs() > rel_cutoff * scale && lam != 0.0 {
            let v = eig.vectors.column(j).to_vec();
            out.rank_one_update(1.0 / lam, &v, &v);
        }
    }
    Ok(out)
}

/// `max |QᵀQ − I|` entrywise.
pub fn orthonormality_defect(q: &DenseMatrix) -> f64 {
    let g = q.tr_matmul(q).expect("square gram");
    let k = g.rows();
    let mut worst = 0.0f64;
    for j in 0..k {
        for i in 0..k {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g.get(i, j) - target).abs());
        }
    }
    worst
}

/// Rejects matrices that are not symmetric psd to within `tol` (scaled by
/// `max(1, ‖A‖)`), returning the eigenvalues on success.
pub fn check_psd(a: &DenseMatrix, tol: f64) -> Result<Vec<f64>> {
    ensure_dims(a.is_square(), || format!("expected square matrix, got {:?}", a.shape()))?;
    let scale = a.max_abs().max(1.0);
    let asym = a.asymmetry();
    if asym > tol * scale {
        return Err(RnlaError::NotSymmetric(asym));
    }
    let vals = sym_eigenvalues(a)?;
    if let Some(&min) = vals.last() {
        if min < -tol * scale {
            return Err(RnlaError::NotPsd(min));
        }
    }
    Ok(vals)
}
