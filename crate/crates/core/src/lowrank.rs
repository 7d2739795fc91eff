//! Randomized SVD, randomized subspace iteration, randomly pivoted
//! Cholesky, and column Nyström approximation.

use crate::error::{ceil_count, ensure_dims, ensure_domain, Result};
use crate::generate::SpectrumSpec;
use crate::linalg::{orth, pinv, pinv_sym, svd, Svd};
use crate::matrix::DenseMatrix;
use crate::matrix_mc::DiscreteSampler;
use crate::oracle::{EntryOracle, MatVecOracle};
use crate::rng::RngStream;

/// Relative rank cutoff used when orthonormalizing sample matrices.
pub const ORTH_TOL: f64 = 1e-12;

/// `B̂ = Q C` with orthonormal `Q`.
#[derive(Clone, Debug)]
pub struct LowRankApprox {
    pub q: DenseMatrix,
    pub c: DenseMatrix,
    /// Optional SVD of `B̂` (`U = Q·U_C`).
    pub svd: Option<Svd>,
}

impl LowRankApprox {
    pub fn rank(&self) -> usize {
        self.q.cols()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        self.q.matmul(&self.c).expect("conformal factors")
    }

    fn with_svd(mut self) -> Self {
        let inner = svd(&self.c);
        let u = self.q.matmul(&inner.u).expect("conformal factors");
        self.svd = Some(Svd { u, s: inner.s, v: inner.v });
        self
    }
}

/// `n × s` standard normal test matrix.
pub fn gaussian_test_matrix(n: usize, s: usize, rng: &mut RngStream) -> DenseMatrix {
    rng.normal_matrix(n, s)
}

/// Randomized SVD with a Gaussian test matrix: `Y = BΩ`, `Q = orth(Y)`,
/// `C = QᵀB`. Costs `s` products with `B` and `rank(Q)` with `Bᵀ`.
pub fn randomized_svd(b: &MatVecOracle, s: usize, compute_svd: bool, rng: &mut RngStream) -> Result<LowRankApprox> {
    ensure_domain(s >= 1 && s <= b.rows().min(b.cols()), || {
        format!("need 1 <= s <= min(m, n) = {}, got {s}", b.rows().min(b.cols()))
    })?;
    let omega = gaussian_test_matrix(b.cols(), s, rng);
    randomized_svd_with_test_matrix(b, &omega, compute_svd)
}

/// Randomized SVD for a given test matrix `Ω`.
pub fn randomized_svd_with_test_matrix(
    b: &MatVecOracle,
    omega: &DenseMatrix,
    compute_svd: bool,
) -> Result<LowRankApprox> {
    ensure_dims(omega.rows() == b.cols(), || {
        format!("test matrix has {} rows, oracle has {} columns", omega.rows(), b.cols())
    })?;
    let y = b.apply_matrix(omega)?;
    let q = orth(&y, ORTH_TOL);
    let c = b.apply_adjoint_matrix(&q)?.transpose();
    let approx = LowRankApprox { q, c, svd: None };
    Ok(if compute_svd { approx.with_svd() } else { approx })
}

/// Subspace iteration: `Q_t = orth(B X_{t−1})`, `X_t = BᵀQ_t`, with
/// `X_0 = Ω`. `T = 1` is the randomized SVD.
pub fn subspace_iteration(
    b: &MatVecOracle,
    s: usize,
    t: usize,
    compute_svd: bool,
    rng: &mut RngStream,
) -> Result<LowRankApprox> {
    ensure_domain(t >= 1, || "subspace iteration needs T >= 1".into())?;
    ensure_domain(s >= 1 && s <= b.rows().min(b.cols()), || {
        format!("need 1 <= s <= min(m, n) = {}, got {s}", b.rows().min(b.cols()))
    })?;
    let mut x = gaussian_test_matrix(b.cols(), s, rng);
    let mut q = DenseMatrix::zeros(b.rows(), 0);
    for _ in 0..t {
        q = orth(&b.apply_matrix(&x)?, ORTH_TOL);
        x = b.apply_adjoint_matrix(&q)?;
    }
    let approx = LowRankApprox { q, c: x.transpose(), svd: None };
    Ok(if compute_svd { approx.with_svd() } else { approx })
}

/// `(1 + r/(s−r−1))·Σ_{i>r} σᵢ²`; requires `s ≥ r + 2`.
pub fn rsvd_error_bound(sigma: &SpectrumSpec, r: usize, s: usize) -> Result<f64> {
    ensure_domain(s >= r + 2, || format!("bound needs s >= r + 2, got r={r}, s={s}"))?;
    Ok((1.0 + r as f64 / (s - r - 1) as f64) * sigma.tail_energy(r))
}

/// Smallest `s` with `1 + r/(s−r−1) ≤ 1 + ε`, namely `⌈1 + r + r/ε⌉`.
pub fn rsvd_samples_for(r: usize, eps: f64) -> Result<usize> {
    ensure_domain(eps > 0.0, || format!("eps must be positive, got {eps}"))?;
    Ok(ceil_count(1.0 + r as f64 + r as f64 / eps).max(r + 2))
}

/// Per-draw bound `‖Σ⊥‖_F² + ‖Σ⊥ Ω⊥ Ω_r†‖_F²` where `Ω_r = V_rᵀΩ` and
/// `Ω⊥ = V⊥ᵀΩ` for the full SVD `B = UΣVᵀ` (`v` is `n × n`, `sigma` has
/// `min(m, n)` entries).
pub fn rsvd_deterministic_bound(sigma: &[f64], v: &DenseMatrix, omega: &DenseMatrix, r: usize) -> Result<f64> {
    let n = v.rows();
    ensure_dims(v.cols() >= sigma.len() && omega.rows() == n, || "inconsistent SVD and test matrix".into())?;
    ensure_domain(r <= sigma.len(), || format!("r = {r} exceeds rank"))?;
    let vt_omega = v.tr_matmul(omega)?;
    let s = omega.cols();
    let omega_r = DenseMatrix::from_fn(r, s, |i, j| vt_omega.get(i, j));
    let tail_rows = sigma.len() - r;
    let sigma_perp_omega_perp = DenseMatrix::from_fn(tail_rows, s, |i, j| sigma[r + i] * vt_omega.get(r + i, j));
    let cross = sigma_perp_omega_perp.matmul(&pinv(&omega_r, 1e-14))?;
    let tail: f64 = sigma[r..].iter().map(|x| x * x).sum();
    Ok(tail + cross.frobenius_norm().powi(2))
}

/// Output of partial Cholesky: `Â = F Fᵀ` with pivot list `S`.
#[derive(Clone, Debug)]
pub struct CholFactor {
    /// `n × k`
    pub f: DenseMatrix,
    pub pivots: Vec<usize>,
    /// Diagonal of `A − FFᵀ`, clamped at zero.
    pub residual_diag: Vec<f64>,
    /// Sampled indices discarded because their residual pivot was not
    /// numerically positive.
    pub rejected: Vec<usize>,
    /// `tr(A)` as read from the diagonal.
    pub initial_trace: f64,
}

impl CholFactor {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn approximation(&self) -> DenseMatrix {
        self.f.matmul(&self.f.transpose()).expect("conformal").symmetrize()
    }

    pub fn residual_trace(&self) -> f64 {
        self.residual_diag.iter().sum()
    }
}

// A residual pivot at or below this fraction of the original diagonal
// entry is treated as zero.
const PIVOT_REL_TOL: f64 = 1e-13;

struct PartialCholesky<'o, 'a> {
    a: &'o EntryOracle<'a>,
    d0: Vec<f64>,
    cols: Vec<Vec<f64>>,
    pivots: Vec<usize>,
    d: Vec<f64>,
}

impl<'o, 'a> PartialCholesky<'o, 'a> {
    fn new(a: &'o EntryOracle<'a>) -> Self {
        let d0 = a.diag();
        let d = d0.iter().map(|v| v.max(0.0)).collect();
        Self { a, d0, cols: Vec::new(), pivots: Vec::new(), d }
    }

    /// Eliminates `s`; returns false (and changes nothing) when the residual
    /// pivot is not numerically positive.
    fn eliminate(&mut self, s: usize) -> bool {
        let mut c = self.a.column(s);
        for f in &self.cols {
            let fs = f[s];
            if fs != 0.0 {
                for (ci, fi) in c.iter_mut().zip(f) {
                    *ci -= fi * fs;
                }
            }
        }
        let piv = c[s];
        if !(piv > PIVOT_REL_TOL * self.d0[s].abs()) || piv <= 0.0 {
            return false;
        }
        let scale = 1.0 / piv.sqrt();
        c.iter_mut().for_each(|v| *v *= scale);
        for (di, fi) in self.d.iter_mut().zip(&c) {
            *di = (*di - fi * fi).max(0.0);
        }
        self.d[s] = 0.0;
        self.cols.push(c);
        self.pivots.push(s);
        true
    }

    fn finish(self, rejected: Vec<usize>) -> CholFactor {
        let n = self.a.dim();
        let f = DenseMatrix::from_columns(&self.cols, n).expect("finite factor");
        CholFactor {
            f,
            pivots: self.pivots,
            residual_diag: self.d,
            rejected,
            initial_trace: self.d0.iter().sum(),
        }
    }
}

/// Randomly pivoted partial Cholesky: each pivot is drawn with probability
/// proportional to the current residual diagonal. Reads the diagonal once
/// and one column per step, so `(k+1)·n` entry evaluations when no pivot is
/// rejected. With `stop_eta`, stops once `Σd < stop_eta · tr(A)`.
pub fn rpcholesky(a: &EntryOracle, k: usize, stop_eta: Option<f64>, rng: &mut RngStream) -> Result<CholFactor> {
    ensure_domain(k >= 1, || "rank must be at least 1".into())?;
    if let Some(eta) = stop_eta {
        ensure_domain(eta > 0.0 && eta < 1.0, || format!("stop_eta must lie in (0, 1), got {eta}"))?;
    }
    let mut state = PartialCholesky::new(a);
    let tr0: f64 = state.d.iter().sum();
    let mut rejected = Vec::new();
    let mut excluded = vec![false; a.dim()];
    while state.pivots.len() < k.min(a.dim()) {
        let weights: Vec<f64> = state.d.iter().zip(&excluded).map(|(d, e)| if *e { 0.0 } else { *d }).collect();
        let remaining: f64 = weights.iter().sum();
        if !(remaining > 0.0) {
            break;
        }
        if let Some(eta) = stop_eta {
            if state.d.iter().sum::<f64>() < eta * tr0 {
                break;
            }
        }
        let s = DiscreteSampler::new(&weights)?.sample(rng);
        if !state.eliminate(s) {
            excluded[s] = true;
            state.d[s] = 0.0;
            rejected.push(s);
        }
    }
    Ok(state.finish(rejected))
}

/// Partial Cholesky with a prescribed pivot order.
pub fn cholesky_with_pivots(a: &EntryOracle, pivots: &[usize]) -> Result<CholFactor> {
    ensure_domain(pivots.iter().all(|&p| p < a.dim()), || "pivot out of range".into())?;
    let mut state = PartialCholesky::new(a);
    let mut rejected = Vec::new();
    for &p in pivots {
        if !state.eliminate(p) {
            rejected.push(p);
        }
    }
    Ok(state.finish(rejected))
}

/// `A⟨S⟩ = A(:,S) A(S,S)† A(S,:)` with pseudoinverse cutoff
/// `1e-12·‖A(S,S)‖`.
pub fn nystrom_from_pivots(a: &DenseMatrix, s: &[usize]) -> Result<DenseMatrix> {
    ensure_dims(a.is_square(), || format!("expected square matrix, got {:?}", a.shape()))?;
    ensure_domain(!s.is_empty(), || "pivot set is empty".into())?;
    ensure_domain(s.iter().all(|&i| i < a.rows()), || "pivot out of range".into())?;
    let mut sorted = s.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    ensure_domain(sorted.len() == s.len(), || "pivots must be distinct".into())?;
    let all: Vec<usize> = (0..a.rows()).collect();
    let cols = a.submatrix(&all, s);
    let core = a.submatrix(s, s);
    let inv = pinv_sym(&core, 1e-12)?;
    Ok(cols.matmul(&inv)?.matmul(&cols.transpose())?.symmetrize())
}

/// `⌈r/ε + r·log(1/(ε·η))⌉` columns suffice for trace error
/// `(1+ε)·Σ_{j>r} λ_j` when the relative tail is `η`.
pub fn rpc_rank_needed(r: usize, eps: f64, eta: f64) -> Result<usize> {
    ensure_domain(eps > 0.0, || format!("eps must be positive, got {eps}"))?;
    ensure_domain(eta > 0.0 && eta < 1.0, || format!("eta must lie in (0, 1), got {eta}"))?;
    let r = r as f64;
    Ok(ceil_count(r / eps + r * (1.0 / (eps * eta)).ln()))
}
