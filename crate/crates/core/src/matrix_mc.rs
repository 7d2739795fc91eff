//! Matrix Monte Carlo: approximate `B = Σ_j B_j` by averaging independent
//! draws of `Y = p_j⁻¹ B_j`.

use std::collections::BTreeMap;

use crate::error::{ceil_count, ensure_dims, ensure_domain, Result, RnlaError};
use crate::linalg::spectral_norm;
use crate::matrix::{dot, DenseMatrix};
use crate::rng::RngStream;

/// Inverse-CDF sampler over a finite distribution.
#[derive(Clone, Debug)]
pub struct DiscreteSampler {
    cdf: Vec<f64>,
    last_positive: usize,
}

impl DiscreteSampler {
    /// Weights need not be normalized; they must be nonnegative with a
    /// positive sum.
    pub fn new(weights: &[f64]) -> Result<Self> {
        ensure_domain(weights.iter().all(|w| w.is_finite() && *w >= 0.0), || {
            "weights must be finite and nonnegative".into()
        })?;
        let mut acc = 0.0;
        let cdf: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        if !(acc > 0.0) {
            return Err(RnlaError::ZeroMatrix);
        }
        let last_positive = weights.iter().rposition(|w| *w > 0.0).expect("positive sum");
        Ok(Self { cdf, last_positive })
    }

    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cdf.is_empty()
    }

    pub fn sample(&self, rng: &mut RngStream) -> usize {
        let total = *self.cdf.last().expect("nonempty");
        let u = rng.uniform() * total;
        self.cdf.partition_point(|c| *c <= u).min(self.last_positive)
    }
}

/// A finite decomposition `B = Σ_j B_j` with sampling probabilities `p_j`.
pub trait SampleableDecomposition: Sync {
    /// Shape of `B`.
    fn dims(&self) -> (usize, usize);

    /// `p_j`, summing to one.
    fn probs(&self) -> &[f64];

    /// `p_j⁻¹ B_j`
    fn scaled_summand(&self, j: usize) -> DenseMatrix;

    /// `acc += w · p_j⁻¹ B_j`
    fn accumulate(&self, j: usize, w: f64, acc: &mut DenseMatrix) {
        let y = self.scaled_summand(j);
        for (a, v) in acc.as_mut_slice().iter_mut().zip(y.as_slice()) {
            *a += w * v;
        }
    }

    /// `‖p_j⁻¹ B_j‖`
    fn summand_norm(&self, j: usize) -> f64 {
        spectral_norm(&self.scaled_summand(j))
    }

    /// `(E[YYᵀ], E[YᵀY])`
    fn second_moments(&self) -> (DenseMatrix, DenseMatrix) {
        let (m, n) = self.dims();
        let mut left = DenseMatrix::zeros(m, m);
        let mut right = DenseMatrix::zeros(n, n);
        for (j, &p) in self.probs().iter().enumerate() {
            if p > 0.0 {
                let y = self.scaled_summand(j);
                let yyt = y.matmul(&y.transpose()).expect("conformal");
                let yty = y.tr_matmul(&y).expect("conformal");
                left = left.add(&yyt.scale(p)).expect("same shape");
                right = right.add(&yty.scale(p)).expect("same shape");
            }
        }
        (left, right)
    }
}

/// Exhaustive expectation `Σ_j p_j · p_j⁻¹ B_j`, which equals `B` for a
/// valid decomposition.
pub fn expectation<D: SampleableDecomposition + ?Sized>(d: &D) -> DenseMatrix {
    let (m, n) = d.dims();
    let mut acc = DenseMatrix::zeros(m, n);
    for (j, &p) in d.probs().iter().enumerate() {
        if p > 0.0 {
            d.accumulate(j, p, &mut acc);
        }
    }
    acc
}

fn validate_probs(probs: &[f64]) -> Result<()> {
    ensure_domain(probs.iter().all(|p| p.is_finite() && *p >= 0.0), || "probabilities must be nonnegative".into())?;
    let total: f64 = probs.iter().sum();
    ensure_domain((total - 1.0).abs() <= 1e-12, || format!("probabilities sum to {total}, not 1"))
}

/// Explicit list of summands with caller-chosen probabilities.
#[derive(Clone, Debug)]
pub struct ExplicitDecomposition {
    summands: Vec<DenseMatrix>,
    probs: Vec<f64>,
}

impl ExplicitDecomposition {
    pub fn new(summands: Vec<DenseMatrix>, probs: Vec<f64>) -> Result<Self> {
        ensure_domain(!summands.is_empty(), || "need at least one summand".into())?;
        ensure_dims(summands.len() == probs.len(), || "one probability per summand".into())?;
        let shape = summands[0].shape();
        ensure_dims(summands.iter().all(|b| b.shape() == shape), || "summands differ in shape".into())?;
        validate_probs(&probs)?;
        ensure_domain(
            summands.iter().zip(&probs).all(|(b, p)| *p > 0.0 || b.max_abs() == 0.0),
            || "a nonzero summand has probability zero".into(),
        )?;
        Ok(Self { summands, probs })
    }
}

impl SampleableDecomposition for ExplicitDecomposition {
    fn dims(&self) -> (usize, usize) {
        self.summands[0].shape()
    }

    fn probs(&self) -> &[f64] {
        &self.probs
    }

    fn scaled_summand(&self, j: usize) -> DenseMatrix {
        self.summands[j].scale(1.0 / self.probs[j])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ColumnSampling {
    /// `p_k = ‖a_k‖² / ‖A‖_F²`
    Weighted,
    /// `p_k = 1/d`
    Uniform,
}

/// `AAᵀ = Σ_k a_k a_kᵀ` over the columns of `A`.
#[derive(Clone, Debug)]
pub struct ColumnOuterProducts {
    a: DenseMatrix,
    col_sq: Vec<f64>,
    probs: Vec<f64>,
}

impl ColumnOuterProducts {
    pub fn new(a: DenseMatrix, sampling: ColumnSampling) -> Result<Self> {
        ensure_domain(a.cols() >= 1, || "matrix has no columns".into())?;
        let col_sq: Vec<f64> = (0..a.cols()).map(|k| dot(a.column(k), a.column(k))).collect();
        let total: f64 = col_sq.iter().sum();
        if total == 0.0 {
            return Err(RnlaError::ZeroMatrix);
        }
        let probs = match sampling {
            ColumnSampling::Weighted => col_sq.iter().map(|c| c / total).collect(),
            ColumnSampling::Uniform => vec![1.0 / a.cols() as f64; a.cols()],
        };
        Ok(Self { a, col_sq, probs })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }
}

impl SampleableDecomposition for ColumnOuterProducts {
    fn dims(&self) -> (usize, usize) {
        (self.a.rows(), self.a.rows())
    }

    fn probs(&self) -> &[f64] {
        &self.probs
    }

    fn scaled_summand(&self, j: usize) -> DenseMatrix {
        let mut y = DenseMatrix::zeros(self.a.rows(), self.a.rows());
        self.accumulate(j, 1.0, &mut y);
        y
    }

    fn accumulate(&self, j: usize, w: f64, acc: &mut DenseMatrix) {
        let a = self.a.column(j);
        acc.rank_one_update(w / self.probs[j], a, a);
    }

    fn summand_norm(&self, j: usize) -> f64 {
        self.col_sq[j] / self.probs[j]
    }

    fn second_moments(&self) -> (DenseMatrix, DenseMatrix) {
        // Y² = p⁻² ‖a‖² a aᵀ, so E[Y²] = Σ_k ‖a_k‖²/p_k · a_k a_kᵀ
        let n = self.a.rows();
        let mut m = DenseMatrix::zeros(n, n);
        for (k, &p) in self.probs.iter().enumerate() {
            if p > 0.0 {
                let a = self.a.column(k);
                m.rank_one_update(self.col_sq[k] / p, a, a);
            }
        }
        let m = m.symmetrize();
        (m.clone(), m)
    }
}

/// Entrywise decomposition `B = Σ b_ij e_i e_jᵀ` with the mixed
/// `ℓ₂/ℓ₁` probabilities `p_ij = ½(b_ij²/‖B‖_F² + |b_ij|/‖B‖_ℓ₁)`.
#[derive(Clone, Debug)]
pub struct EntrywiseDecomposition {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
    probs: Vec<f64>,
}

impl EntrywiseDecomposition {
    pub fn new(b: &DenseMatrix) -> Result<Self> {
        let (rows, cols) = b.shape();
        let mut entries = Vec::new();
        for j in 0..cols {
            for i in 0..rows {
                let v = b.get(i, j);
                if v != 0.0 {
                    entries.push((i, j, v));
                }
            }
        }
        if entries.is_empty() {
            return Err(RnlaError::ZeroMatrix);
        }
        let fro2: f64 = entries.iter().map(|e| e.2 * e.2).sum();
        let l1: f64 = entries.iter().map(|e| e.2.abs()).sum();
        let probs = entries.iter().map(|e| 0.5 * (e.2 * e.2 / fro2 + e.2.abs() / l1)).collect();
        Ok(Self { rows, cols, entries, probs })
    }

    /// Nonzero entries `(i, j, b_ij)` in column-major order, aligned with
    /// [`SampleableDecomposition::probs`].
    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }
}

impl SampleableDecomposition for EntrywiseDecomposition {
    fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn probs(&self) -> &[f64] {
        &self.probs
    }

    fn scaled_summand(&self, j: usize) -> DenseMatrix {
        let mut y = DenseMatrix::zeros(self.rows, self.cols);
        self.accumulate(j, 1.0, &mut y);
        y
    }

    fn accumulate(&self, j: usize, w: f64, acc: &mut DenseMatrix) {
        let (r, c, v) = self.entries[j];
        acc.set(r, c, acc.get(r, c) + w * v / self.probs[j]);
    }

    fn summand_norm(&self, j: usize) -> f64 {
        self.entries[j].2.abs() / self.probs[j]
    }

    fn second_moments(&self) -> (DenseMatrix, DenseMatrix) {
        let mut left = vec![0.0; self.rows];
        let mut right = vec![0.0; self.cols];
        for (&(i, j, v), &p) in self.entries.iter().zip(&self.probs) {
            left[i] += v * v / p;
            right[j] += v * v / p;
        }
        (DenseMatrix::from_diagonal(&left), DenseMatrix::from_diagonal(&right))
    }
}

#[derive(Clone, Debug)]
pub struct MCMatrixEstimate {
    pub matrix: DenseMatrix,
    pub samples: usize,
    /// Sampled summand index per draw.
    pub draws: Vec<usize>,
}

/// `B̂_s = (1/s) Σ Yᵢ`, draw `i` taken from `rng.substream(i)`.
pub fn mc_approximate<D: SampleableDecomposition + ?Sized>(
    d: &D,
    s: usize,
    rng: &RngStream,
) -> Result<MCMatrixEstimate> {
    ensure_domain(s >= 1, || "need at least one sample".into())?;
    let sampler = DiscreteSampler::new(d.probs())?;
    let (m, n) = d.dims();
    let mut acc = DenseMatrix::zeros(m, n);
    let draws: Vec<usize> = (0..s).map(|i| sampler.sample(&mut rng.substream(i as u64))).collect();
    let w = 1.0 / s as f64;
    for &j in &draws {
        d.accumulate(j, w, &mut acc);
    }
    Ok(MCMatrixEstimate { matrix: acc, samples: s, draws })
}

/// Monte Carlo approximation of `AAᵀ` from `s` sampled columns.
pub fn approx_matmul(
    a: &DenseMatrix,
    s: usize,
    sampling: ColumnSampling,
    rng: &RngStream,
) -> Result<MCMatrixEstimate> {
    let d = ColumnOuterProducts::new(a.clone(), sampling)?;
    let mut est = mc_approximate(&d, s, rng)?;
    est.matrix = est.matrix.symmetrize();
    Ok(est)
}

/// Sparse estimate stored as merged `(row, col, value)` triplets.
#[derive(Clone, Debug)]
pub struct SparseEstimate {
    pub rows: usize,
    pub cols: usize,
    /// Column-major order, one triplet per distinct position.
    pub triplets: Vec<(usize, usize, f64)>,
    pub samples: usize,
}

impl SparseEstimate {
    pub fn nnz(&self) -> usize {
        self.triplets.len()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, self.cols);
        for &(i, j, v) in &self.triplets {
            out.set(i, j, v);
        }
        out
    }
}

/// Entrywise sparsification with `s` draws; duplicate positions merge.
pub fn sparsify(b: &DenseMatrix, s: usize, rng: &RngStream) -> Result<SparseEstimate> {
    ensure_domain(s >= 1, || "need at least one sample".into())?;
    let d = EntrywiseDecomposition::new(b)?;
    let sampler = DiscreteSampler::new(d.probs())?;
    let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let w = 1.0 / s as f64;
    for i in 0..s {
        let j = sampler.sample(&mut rng.substream(i as u64));
        let (r, c, v) = d.entries()[j];
        *merged.entry((c, r)).or_insert(0.0) += w * v / d.probs()[j];
    }
    let triplets = merged.into_iter().map(|((c, r), v)| (r, c, v)).collect();
    Ok(SparseEstimate { rows: b.rows(), cols: b.cols(), triplets, samples: s })
}

/// Per-sample second moment `v` and uniform bound `L`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McStats {
    pub v: f64,
    pub l: f64,
}

/// `v = max(‖E[YYᵀ]‖, ‖E[YᵀY]‖)` and `L = max_j ‖p_j⁻¹B_j‖`, both by
/// exhaustive summation.
pub fn mc_stats<D: SampleableDecomposition + ?Sized>(d: &D) -> McStats {
    let (left, right) = d.second_moments();
    let v = spectral_norm(&left).max(spectral_norm(&right));
    let l = d
        .probs()
        .iter()
        .enumerate()
        .filter(|(_, p)| **p > 0.0)
        .map(|(j, _)| d.summand_norm(j))
        .fold(0.0, f64::max);
    McStats { v, l }
}

/// `E‖B̂_s − B‖ ≤ √(2v log(m+n)/s) + L log(m+n)/s`
pub fn matrix_mc_bound(stats: McStats, m: usize, n: usize, s: usize) -> f64 {
    let lg = ((m + n) as f64).ln();
    let s = s as f64;
    (2.0 * stats.v * lg / s).sqrt() + stats.l * lg / s
}

/// `⌈4·max(v/(ε²‖B‖²), L/(ε‖B‖))·log(m+n)⌉`
pub fn matrix_samples_needed(v: f64, l: f64, norm_b: f64, eps: f64, m: usize, n: usize) -> Result<usize> {
    ensure_domain(v > 0.0 && l > 0.0 && norm_b > 0.0, || "v, L, and ‖B‖ must be positive".into())?;
    ensure_domain(eps > 0.0 && eps <= 1.0, || format!("eps must lie in (0, 1], got {eps}"))?;
    ensure_domain(m >= 1 && n >= 1, || "dimensions must be positive".into())?;
    let t = (v / (eps * eps * norm_b * norm_b)).max(l / (eps * norm_b));
    Ok(ceil_count(4.0 * t * ((m + n) as f64).ln()))
}
