//! Nyström preconditioning for regularized psd systems `(A + μI)x = b`,
//! and preconditioned conjugate gradients.

use crate::error::{ensure_dims, ensure_domain, Result};
use crate::linalg::svd;
use crate::lowrank::rpcholesky;
use crate::matrix::{axpy, dot, norm2, DenseMatrix};
use crate::oracle::{EntryOracle, LinearOperator};
use crate::rng::RngStream;

/// Symmetric positive-definite approximation of `(A + μI)⁻¹`.
pub trait Preconditioner {
    fn apply(&self, r: &[f64]) -> Vec<f64>;
}

/// `M = I`
#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        r.to_vec()
    }
}

/// `U(Λ + μI)⁻¹Uᵀ + μ⁻¹(I − UUᵀ)` for a low-rank approximation
/// `Â = UΛUᵀ`.
#[derive(Clone, Debug)]
pub struct NystromPreconditioner {
    pub u: DenseMatrix,
    pub lambda: Vec<f64>,
    pub mu: f64,
}

impl NystromPreconditioner {
    /// From a factor `Â = FFᵀ`, via the thin SVD of `F`.
    pub fn from_factor(f: &DenseMatrix, mu: f64) -> Result<Self> {
        ensure_domain(mu > 0.0, || format!("mu must be positive, got {mu}"))?;
        if f.cols() == 0 {
            return Ok(Self { u: DenseMatrix::zeros(f.rows(), 0), lambda: vec![], mu });
        }
        let dec = svd(f);
        let lambda = dec.s.iter().map(|s| s * s).collect();
        Ok(Self { u: dec.u, lambda, mu })
    }

    pub fn rank(&self) -> usize {
        self.lambda.len()
    }

    /// Dense `(Â + μI)⁻¹` assembled from the same formula.
    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.u.rows();
        let cols: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                self.apply(&e)
            })
            .collect();
        DenseMatrix::from_columns(&cols, n).expect("finite")
    }
}

impl Preconditioner for NystromPreconditioner {
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let coeffs: Vec<f64> = (0..self.rank()).map(|j| dot(self.u.column(j), v)).collect();
        let mut out: Vec<f64> = v.iter().map(|x| x / self.mu).collect();
        for (j, c) in coeffs.iter().enumerate() {
            let w = c / (self.lambda[j] + self.mu) - c / self.mu;
            axpy(w, self.u.column(j), &mut out);
        }
        out
    }
}

/// Randomly pivoted Cholesky of rank `k`, turned into a preconditioner for
/// `A + μI`. `k = 0` gives `μ⁻¹I`.
pub fn build_preconditioner(a: &EntryOracle, k: usize, mu: f64, rng: &mut RngStream) -> Result<NystromPreconditioner> {
    ensure_domain(mu > 0.0, || format!("mu must be positive, got {mu}"))?;
    if k == 0 {
        return NystromPreconditioner::from_factor(&DenseMatrix::zeros(a.dim(), 0), mu);
    }
    let chol = rpcholesky(a, k, None, rng)?;
    NystromPreconditioner::from_factor(&chol.f, mu)
}

#[derive(Clone, Debug)]
pub struct PcgOutput {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `‖r_t‖/‖b‖` per iteration.
    pub residuals: Vec<f64>,
}

/// Residual is recomputed from scratch at this cadence.
pub const RESIDUAL_REFRESH: usize = 25;

fn shifted_apply(a: &dyn LinearOperator, mu: f64, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; x.len()];
    a.apply_into(x, &mut y);
    axpy(mu, x, &mut y);
    y
}

/// Preconditioned CG on `(A + μI)x = b` from `x = 0`, stopping when the
/// true relative residual is at most `tol`.
pub fn pcg_solve(
    a: &dyn LinearOperator,
    b: &[f64],
    mu: f64,
    m: &dyn Preconditioner,
    tol: f64,
    maxit: usize,
) -> Result<PcgOutput> {
    let n = a.nrows();
    ensure_dims(a.ncols() == n && b.len() == n, || "system dimensions disagree".into())?;
    ensure_domain(mu > 0.0, || format!("mu must be positive, got {mu}"))?;
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(PcgOutput { x, iterations: 0, converged: true, residuals: vec![] });
    }
    let mut r = b.to_vec();
    let mut z = m.apply(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut residuals = Vec::new();
    for it in 1..=maxit {
        let q = shifted_apply(a, mu, &p);
        let alpha = rz / dot(&p, &q);
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &q, &mut r);
        if it % RESIDUAL_REFRESH == 0 {
            r = b.iter().zip(shifted_apply(a, mu, &x)).map(|(bi, ax)| bi - ax).collect();
        }
        let mut rel = norm2(&r) / bnorm;
        if rel <= tol {
            let true_r: Vec<f64> = b.iter().zip(shifted_apply(a, mu, &x)).map(|(bi, ax)| bi - ax).collect();
            rel = norm2(&true_r) / bnorm;
            if rel <= tol {
                residuals.push(rel);
                return Ok(PcgOutput { x, iterations: it, converged: true, residuals });
            }
            r = true_r;
        }
        residuals.push(rel);
        z = m.apply(&r);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Ok(PcgOutput { x, iterations: maxit, converged: false, residuals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{gen_psd, SpectrumSpec};

    #[test]
    fn woodbury_matches_dense_inverse() {
        let mut rng = RngStream::from_seed(1);
        let f = rng.normal_matrix(12, 4);
        let mu = 0.3;
        let p = NystromPreconditioner::from_factor(&f, mu).unwrap();
        let ahat = f.matmul(&f.transpose()).unwrap().add_scaled_identity(mu);
        let inv = ahat.into_nalgebra().try_inverse().unwrap();
        let diff = p.to_dense().into_nalgebra() - inv;
        assert!(diff.amax() <= 1e-8);
    }

    #[test]
    fn rank_zero_is_scaled_identity() {
        let p = NystromPreconditioner::from_factor(&DenseMatrix::zeros(3, 0), 4.0).unwrap();
        assert_eq!(p.apply(&[4.0, 8.0, -4.0]), vec![1.0, 2.0, -1.0]);
    }

    #[test]
    fn zero_rhs() {
        let a = DenseMatrix::identity(3);
        let out = pcg_solve(&a, &[0.0; 3], 1.0, &IdentityPreconditioner, 1e-10, 10).unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(out.x, vec![0.0; 3]);
    }

    #[test]
    fn full_rank_preconditioner_converges_immediately() {
        let mut rng = RngStream::from_seed(2);
        let a = gen_psd(&SpectrumSpec::geometric(1.0, 0.6, 15).unwrap(), &mut rng);
        let o = EntryOracle::from_dense(&a).unwrap();
        let p = build_preconditioner(&o, 15, 1e-3, &mut rng).unwrap();
        let b = rng.normal_vec(15);
        let out = pcg_solve(&a, &b, 1e-3, &p, 1e-10, 50).unwrap();
        assert!(out.converged);
        assert!(out.iterations <= 2, "{} iterations", out.iterations);
    }

    #[test]
    fn manufactured_solution() {
        let mut rng = RngStream::from_seed(3);
        let a = gen_psd(&SpectrumSpec::geometric(1.0, 0.8, 30).unwrap(), &mut rng);
        let xt = rng.normal_vec(30);
        let mu = 0.01;
        let b = shifted_apply(&a, mu, &xt);
        let out = pcg_solve(&a, &b, mu, &IdentityPreconditioner, 1e-12, 500).unwrap();
        assert!(out.converged);
        let err: f64 = out.x.iter().zip(&xt).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8);
    }
}
