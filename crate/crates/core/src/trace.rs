//! Stochastic trace estimation from matrix–vector products.
//!
//! Sample `i` draws its test vector from `rng.substream(i)`, so estimates
//! do not depend on evaluation order and a prefix of a longer run equals a
//! shorter run.

use crate::error::{ensure_dims, ensure_domain, Result, RnlaError};
use crate::linalg::{check_psd, spectral_norm};
use crate::matrix::{dot, norm2, DenseMatrix};
use crate::oracle::MatVecOracle;
use crate::rng::RngStream;

/// Isotropic test-vector distributions (`E[xxᵀ] = I`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TestVectorDist {
    /// Independent Rademacher entries.
    Signs,
    /// Uniform on the sphere of radius `√n`.
    Sphere,
    /// Standard normal entries.
    Gaussian,
}

impl std::str::FromStr for TestVectorDist {
    type Err = RnlaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "signs" | "rademacher" => Ok(Self::Signs),
            "sphere" => Ok(Self::Sphere),
            "gaussian" | "normal" => Ok(Self::Gaussian),
            other => Err(RnlaError::Domain(format!("unknown test vector distribution '{other}'"))),
        }
    }
}

impl TestVectorDist {
    pub fn sample(self, n: usize, rng: &mut RngStream) -> Vec<f64> {
        match self {
            Self::Signs => rng.sign_vec(n),
            Self::Gaussian => rng.normal_vec(n),
            Self::Sphere => loop {
                let mut g = rng.normal_vec(n);
                let nrm = norm2(&g);
                if nrm > 0.0 {
                    let c = (n as f64).sqrt() / nrm;
                    g.iter_mut().for_each(|v| *v *= c);
                    break g;
                }
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceEstimate {
    /// Sample mean of the per-sample values.
    pub value: f64,
    /// `Σ(Yᵢ − mean)² / (s(s−1))`; `None` when `s < 2`.
    pub variance_estimate: Option<f64>,
    pub samples: usize,
    pub per_sample: Vec<f64>,
    /// Whether the adaptive stopping rule fired. Always `true` for fixed-size runs.
    pub converged: bool,
}

impl TraceEstimate {
    fn from_samples(per_sample: Vec<f64>, converged: bool) -> Self {
        let s = per_sample.len();
        let value = per_sample.iter().sum::<f64>() / s as f64;
        let variance_estimate = (s >= 2).then(|| {
            let ss: f64 = per_sample.iter().map(|y| (y - value) * (y - value)).sum();
            (ss / (s * (s - 1)) as f64).max(0.0)
        });
        Self { value, variance_estimate, samples: s, per_sample, converged }
    }
}

fn quadratic_sample(a: &MatVecOracle, dist: TestVectorDist, rng: &mut RngStream) -> f64 {
    let x = dist.sample(a.cols(), rng);
    dot(&x, &a.apply(&x))
}

fn gram_sample(b: &MatVecOracle, dist: TestVectorDist, rng: &mut RngStream) -> f64 {
    let x = dist.sample(b.cols(), rng);
    let bx = b.apply(&x);
    dot(&x, &b.apply_adjoint(&bx))
}

/// Girard–Hutchinson estimator `(1/s) Σ xᵢᵀ A xᵢ`; exactly `s` matvecs.
pub fn hutchinson(a: &MatVecOracle, s: usize, dist: TestVectorDist, rng: &RngStream) -> Result<TraceEstimate> {
    ensure_dims(a.is_square(), || format!("trace of non-square {} x {} oracle", a.rows(), a.cols()))?;
    ensure_domain(s >= 1, || "need at least one sample".into())?;
    let ys = (0..s).map(|i| quadratic_sample(a, dist, &mut rng.substream(i as u64))).collect();
    Ok(TraceEstimate::from_samples(ys, true))
}

/// Draws samples until `v̂_s ≤ (ε·tr̂_s)²` (checked from `s = 2` on) or
/// `max_samples` is reached, in which case `converged` is `false`.
pub fn adaptive_trace(
    a: &MatVecOracle,
    eps: f64,
    max_samples: usize,
    dist: TestVectorDist,
    rng: &RngStream,
) -> Result<TraceEstimate> {
    ensure_dims(a.is_square(), || format!("trace of non-square {} x {} oracle", a.rows(), a.cols()))?;
    ensure_domain(eps > 0.0, || format!("eps must be positive, got {eps}"))?;
    ensure_domain(max_samples >= 1, || "need at least one sample".into())?;
    let mut ys = Vec::new();
    let (mut mean, mut m2) = (0.0, 0.0);
    let mut converged = false;
    for i in 0..max_samples {
        let y = quadratic_sample(a, dist, &mut rng.substream(i as u64));
        ys.push(y);
        let k = ys.len() as f64;
        let delta = y - mean;
        mean += delta / k;
        m2 += delta * (y - mean);
        if ys.len() >= 2 {
            let v = m2.max(0.0) / (k * (k - 1.0));
            if v <= (eps * mean) * (eps * mean) {
                converged = true;
                break;
            }
        }
    }
    Ok(TraceEstimate::from_samples(ys, converged))
}

/// `tr(A)/‖A‖` for psd `A`; zero for the zero matrix.
pub fn intdim(a: &DenseMatrix) -> Result<f64> {
    check_psd(a, 1e-10)?;
    let nrm = spectral_norm(a);
    if nrm == 0.0 {
        return Ok(0.0);
    }
    Ok(a.trace() / nrm)
}

/// `⌈2/(ε²·intdim)⌉`, at least one.
pub fn trace_samples_needed(intdim: f64, eps: f64) -> Result<usize> {
    ensure_domain(intdim > 0.0 && intdim.is_finite(), || format!("intdim must be positive, got {intdim}"))?;
    ensure_domain(eps > 0.0, || format!("eps must be positive, got {eps}"))?;
    Ok(crate::error::ceil_count(2.0 / (eps * eps * intdim)).max(1))
}

/// Hutchinson on the Gram operator `x ↦ Bᵀ(Bx)`: unbiased for `‖B‖_F²`,
/// `2s` matvecs.
pub fn frobenius_sq_estimate(
    b: &MatVecOracle,
    s: usize,
    dist: TestVectorDist,
    rng: &RngStream,
) -> Result<TraceEstimate> {
    ensure_domain(s >= 1, || "need at least one sample".into())?;
    let ys = (0..s).map(|i| gram_sample(b, dist, &mut rng.substream(i as u64))).collect();
    Ok(TraceEstimate::from_samples(ys, true))
}

/// Half the sample variance of `xᵀBᵀBx` over Gaussian `x`: unbiased for
/// `‖BᵀB‖_F² = Σσᵢ⁴`. `2s` matvecs.
pub fn schatten4_estimate(b: &MatVecOracle, s: usize, rng: &RngStream) -> Result<f64> {
    ensure_domain(s >= 2, || format!("sample variance needs s >= 2, got {s}"))?;
    let est = frobenius_sq_estimate(b, s, TestVectorDist::Gaussian, rng)?;
    // variance_estimate is the variance of the mean; undo the 1/s
    Ok(est.variance_estimate.expect("s >= 2") * s as f64 / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_with_signs_is_exact() {
        let a = DenseMatrix::identity(7);
        let op = MatVecOracle::from_dense(&a);
        let est = hutchinson(&op, 5, TestVectorDist::Signs, &RngStream::from_seed(1)).unwrap();
        assert_eq!(est.value, 7.0);
        assert_eq!(est.variance_estimate, Some(0.0));
        assert_eq!(op.matvec_count(), 5);
    }

    #[test]
    fn non_square_rejected() {
        let a = DenseMatrix::zeros(2, 3);
        let op = MatVecOracle::from_dense(&a);
        assert!(hutchinson(&op, 1, TestVectorDist::Signs, &RngStream::from_seed(1)).is_err());
    }

    #[test]
    fn single_sample_has_no_variance() {
        let a = DenseMatrix::identity(3);
        let op = MatVecOracle::from_dense(&a);
        let est = hutchinson(&op, 1, TestVectorDist::Gaussian, &RngStream::from_seed(1)).unwrap();
        assert_eq!(est.variance_estimate, None);
    }

    #[test]
    fn adaptive_stops_at_two_for_identity() {
        let a = DenseMatrix::identity(4);
        let op = MatVecOracle::from_dense(&a);
        let est = adaptive_trace(&op, 0.1, 100, TestVectorDist::Signs, &RngStream::from_seed(2)).unwrap();
        assert!(est.converged);
        assert_eq!(est.samples, 2);
    }

    #[test]
    fn adaptive_budget_exhaustion() {
        let a = DenseMatrix::from_diagonal(&[1.0, 0.0, 3.0]);
        let op = MatVecOracle::from_dense(&a);
        let rng = RngStream::from_seed(3);
        let est = adaptive_trace(&op, 0.1, 1, TestVectorDist::Gaussian, &rng).unwrap();
        assert!(!est.converged);
        let first = hutchinson(&op, 1, TestVectorDist::Gaussian, &rng).unwrap();
        assert_eq!(est.value, first.value);
    }

    #[test]
    fn sphere_vectors_have_radius_sqrt_n() {
        let mut rng = RngStream::from_seed(4);
        let x = TestVectorDist::Sphere.sample(9, &mut rng);
        assert!((norm2(&x) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn intdim_examples() {
        assert!((intdim(&DenseMatrix::identity(5)).unwrap() - 5.0).abs() < 1e-12);
        let v = [1.0, 2.0, 2.0];
        let mut r1 = DenseMatrix::zeros(3, 3);
        r1.rank_one_update(1.0, &v, &v);
        assert!((intdim(&r1).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(intdim(&DenseMatrix::zeros(3, 3)).unwrap(), 0.0);
        assert!(intdim(&DenseMatrix::from_diagonal(&[1.0, -1.0])).is_err());
    }

    #[test]
    fn samples_needed_formula() {
        assert_eq!(trace_samples_needed(1.0, 1.0).unwrap(), 2);
        assert_eq!(trace_samples_needed(100.0, 0.5).unwrap(), 1);
        assert_eq!(trace_samples_needed(1.0, 1e9).unwrap(), 1);
        assert!(trace_samples_needed(0.0, 1.0).is_err());
        assert!(trace_samples_needed(1.0, 0.0).is_err());
    }

    #[test]
    fn frobenius_examples() {
        let i2 = DenseMatrix::identity(2);
        let op = MatVecOracle::from_dense(&i2);
        let est = frobenius_sq_estimate(&op, 4, TestVectorDist::Signs, &RngStream::from_seed(5)).unwrap();
        assert_eq!(est.value, 2.0);
        assert_eq!(op.matvec_count(), 8);
        let z = DenseMatrix::zeros(3, 2);
        let opz = MatVecOracle::from_dense(&z);
        let est = frobenius_sq_estimate(&opz, 4, TestVectorDist::Gaussian, &RngStream::from_seed(5)).unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.variance_estimate, Some(0.0));
        assert_eq!(schatten4_estimate(&opz, 3, &RngStream::from_seed(5)).unwrap(), 0.0);
        assert!(schatten4_estimate(&opz, 1, &RngStream::from_seed(5)).is_err());
    }
}
