//! Synthetic test problems with prescribed spectra.

use crate::error::{ensure_domain, Result};
use crate::matrix::DenseMatrix;
use crate::rng::RngStream;

/// Nonincreasing list of nonnegative eigenvalues or singular values.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSpec {
    values: Vec<f64>,
}

impl SpectrumSpec {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        ensure_domain(values.iter().all(|v| v.is_finite() && *v >= 0.0), || {
            "spectrum values must be finite and nonnegative".into()
        })?;
        ensure_domain(values.windows(2).all(|w| w[0] >= w[1]), || {
            "spectrum must be sorted nonincreasing".into()
        })?;
        Ok(Self { values })
    }

    /// `first, first·ratio, first·ratio², …` (length `len`).
    pub fn geometric(first: f64, ratio: f64, len: usize) -> Result<Self> {
        ensure_domain((0.0..=1.0).contains(&ratio), || format!("ratio {ratio} not in [0, 1]"))?;
        Self::new((0..len).map(|i| first * ratio.powi(i as i32)).collect())
    }

    /// Logarithmically spaced from `hi` down to `lo`.
    pub fn logspace(hi: f64, lo: f64, len: usize) -> Result<Self> {
        ensure_domain(hi >= lo && lo > 0.0, || format!("need hi >= lo > 0, got {hi}, {lo}"))?;
        if len == 1 {
            return Self::new(vec![hi]);
        }
        let (a, b) = (hi.ln(), lo.ln());
        let step = (b - a) / (len - 1) as f64;
        let mut v: Vec<f64> = (0..len).map(|i| (a + step * i as f64).exp()).collect();
        v[0] = hi;
        v[len - 1] = lo;
        for i in 1..len {
            v[i] = v[i].min(v[i - 1]);
        }
        Self::new(v)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `Σ_{i>r} σᵢ²`
    pub fn tail_energy(&self, r: usize) -> f64 {
        self.values.iter().skip(r).map(|v| v * v).sum()
    }

    /// `Σ_{i>r} σᵢ`
    pub fn tail_sum(&self, r: usize) -> f64 {
        self.values.iter().skip(r).sum()
    }
}

/// `m × k` matrix with orthonormal columns, uniformly distributed on the
/// Stiefel manifold (sign-corrected QR of a Gaussian matrix).
pub fn haar_frame(m: usize, k: usize, rng: &mut RngStream) -> DenseMatrix {
    assert!(k <= m, "frame with {k} columns in dimension {m}");
    if k == 0 {
        return DenseMatrix::zeros(m, 0);
    }
    let g = rng.normal_matrix(m, k);
    let qr = g.into_nalgebra().qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    DenseMatrix::from_nalgebra(q)
}

/// Haar-distributed `n × n` orthogonal matrix.
pub fn haar_orthogonal(n: usize, rng: &mut RngStream) -> DenseMatrix {
    haar_frame(n, n, rng)
}

/// `Q Λ Qᵀ` with Haar `Q`; exactly symmetric.
pub fn gen_psd(spec: &SpectrumSpec, rng: &mut RngStream) -> DenseMatrix {
    let n = spec.len();
    let q = haar_orthogonal(n, rng);
    psd_from_basis(&q, spec.values())
}

/// `Q diag(λ) Qᵀ` for a given orthonormal `Q` (not necessarily square).
pub fn psd_from_basis(q: &DenseMatrix, lambda: &[f64]) -> DenseMatrix {
    let scaled = DenseMatrix::from_fn(q.rows(), lambda.len(), |i, j| q.get(i, j) * lambda[j]);
    let a = scaled.matmul(&q.transpose()).expect("conformal");
    a.symmetrize()
}

/// `U Σ Vᵀ` of size `m × n` with independent Haar frames `U`, `V`.
pub fn gen_with_singular_values(
    m: usize,
    n: usize,
    spec: &SpectrumSpec,
    rng: &mut RngStream,
) -> Result<DenseMatrix> {
    let k = spec.len();
    ensure_domain(k <= m.min(n), || format!("{k} singular values for a {m} x {n} matrix"))?;
    let u = haar_frame(m, k, rng);
    let v = haar_frame(n, k, rng);
    let us = DenseMatrix::from_fn(m, k, |i, j| u.get(i, j) * spec.values()[j]);
    us.matmul(&v.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{orthonormality_defect, singular_values, sym_eigenvalues};

    #[test]
    fn spectrum_validation() {
        assert!(SpectrumSpec::new(vec![1.0, 2.0]).is_err());
        assert!(SpectrumSpec::new(vec![1.0, -1.0]).is_err());
        let s = SpectrumSpec::geometric(1.0, 0.5, 4).unwrap();
        assert_eq!(s.values(), &[1.0, 0.5, 0.25, 0.125]);
        assert!((s.tail_energy(2) - (0.0625 + 0.015625)).abs() < 1e-15);
        let l = SpectrumSpec::logspace(1.0, 1e-8, 5).unwrap();
        assert!((l.values()[2] - 1e-4).abs() < 1e-16);
    }

    #[test]
    fn haar_one_by_one_is_sign() {
        for seed in 0..10 {
            let q = haar_orthogonal(1, &mut RngStream::from_seed(seed));
            assert_eq!(q.get(0, 0).abs(), 1.0);
        }
    }

    #[test]
    fn haar_is_orthogonal_and_seed_dependent() {
        let q1 = haar_orthogonal(3, &mut RngStream::from_seed(1));
        let q2 = haar_orthogonal(3, &mut RngStream::from_seed(2));
        assert!(orthonormality_defect(&q1) < 1e-12);
        assert!(q1.sub(&q2).unwrap().frobenius_norm() > 0.0);
        let big = haar_orthogonal(40, &mut RngStream::from_seed(3));
        assert!(orthonormality_defect(&big) < 1e-12);
    }

    #[test]
    fn gen_psd_examples() {
        let mut rng = RngStream::from_seed(4);
        let a = gen_psd(&SpectrumSpec::new(vec![1.0, 0.0, 0.0]).unwrap(), &mut rng);
        assert!((a.trace() - 1.0).abs() < 1e-12);
        let i3 = gen_psd(&SpectrumSpec::new(vec![1.0; 3]).unwrap(), &mut rng);
        assert!(i3.sub(&DenseMatrix::identity(3)).unwrap().max_abs() < 1e-12);
        let b = gen_psd(&SpectrumSpec::new(vec![2.0, 1.0]).unwrap(), &mut rng);
        let ev = sym_eigenvalues(&b).unwrap();
        assert!((ev[0] - 2.0).abs() < 1e-10 && (ev[1] - 1.0).abs() < 1e-10);
        assert_eq!(b.asymmetry(), 0.0);
    }

    #[test]
    fn gen_singular_values_examples() {
        let mut rng = RngStream::from_seed(5);
        let b = gen_with_singular_values(2, 2, &SpectrumSpec::new(vec![1.0]).unwrap(), &mut rng).unwrap();
        assert!((b.frobenius_norm() - 1.0).abs() < 1e-12);
        let c = gen_with_singular_values(5, 3, &SpectrumSpec::new(vec![3.0, 2.0, 1.0]).unwrap(), &mut rng)
            .unwrap();
        let s = singular_values(&c);
        for (x, y) in s.iter().zip([3.0, 2.0, 1.0]) {
            assert!((x - y).abs() < 1e-10);
        }
        let z = gen_with_singular_values(3, 3, &SpectrumSpec::new(vec![0.0; 2]).unwrap(), &mut rng).unwrap();
        assert_eq!(z.max_abs(), 0.0);
        assert!(gen_with_singular_values(2, 3, &SpectrumSpec::new(vec![1.0; 3]).unwrap(), &mut rng).is_err());
    }
}
