//! Subspace embeddings `Φ ∈ ℝ^{s×n}`: Gaussian, subsampled randomized
//! trigonometric transform (SRTT), and sparse sign maps.

use crate::dct::Dct2;
use crate::error::{ceil_count, ensure_dims, ensure_domain, Result, RnlaError};
use crate::linalg::{orthonormality_defect, singular_values};
use crate::matrix::DenseMatrix;
use crate::rng::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EmbeddingKind {
    Gaussian,
    Srtt,
    SparseSign,
}

impl std::str::FromStr for EmbeddingKind {
    type Err = RnlaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "srtt" => Ok(Self::Srtt),
            "sparse_sign" | "sparse-sign" | "sparse" => Ok(Self::SparseSign),
            other => Err(RnlaError::Domain(format!("unknown embedding kind '{other}'"))),
        }
    }
}

impl std::fmt::Display for EmbeddingKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Gaussian => "gaussian",
            Self::Srtt => "srtt",
            Self::SparseSign => "sparse_sign",
        })
    }
}

#[derive(Debug)]
enum Repr {
    Gaussian(DenseMatrix),
    Srtt { rows: Vec<usize>, signs: Vec<f64>, dct: Dct2 },
    // column j owns entries j*zeta .. (j+1)*zeta
    Sparse { zeta: usize, rows: Vec<usize>, vals: Vec<f64> },
}

#[derive(Debug)]
pub struct Embedding {
    kind: EmbeddingKind,
    s: usize,
    n: usize,
    seed: u64,
    stream_id: u64,
    repr: Repr,
}

/// Recommended sparsity for sparse sign maps.
pub fn default_zeta(s: usize) -> usize {
    s.min(8)
}

/// Gaussian map with i.i.d. `N(0, 1/s)` entries.
pub fn build_gaussian(s: usize, n: usize, rng: &mut RngStream) -> Result<Embedding> {
    ensure_domain(s >= 1 && n >= 1, || format!("need s, n >= 1, got s={s}, n={n}"))?;
    let (seed, stream_id) = (rng.seed(), rng.stream_id());
    let g = rng.normal_matrix(s, n).scale(1.0 / (s as f64).sqrt());
    Ok(Embedding { kind: EmbeddingKind::Gaussian, s, n, seed, stream_id, repr: Repr::Gaussian(g) })
}

/// SRTT `√(n/s) · R · F · D`: random signs `D`, orthonormal DCT-II `F`, and
/// `s` rows `R` drawn without replacement.
pub fn build_srtt(s: usize, n: usize, rng: &mut RngStream) -> Result<Embedding> {
    ensure_domain(s >= 1, || "embedding dimension must be at least 1".into())?;
    ensure_domain(s <= n, || format!("srtt needs s <= n, got s={s}, n={n}"))?;
    let (seed, stream_id) = (rng.seed(), rng.stream_id());
    let signs = rng.sign_vec(n);
    let rows = rng.sample_without_replacement(n, s);
    Ok(Embedding {
        kind: EmbeddingKind::Srtt,
        s,
        n,
        seed,
        stream_id,
        repr: Repr::Srtt { rows, signs, dct: Dct2::new(n) },
    })
}

/// Sparse sign map: each column holds exactly `zeta` entries `±1/√zeta` at
/// distinct uniformly random rows.
pub fn build_sparse_sign(s: usize, n: usize, zeta: usize, rng: &mut RngStream) -> Result<Embedding> {
    ensure_domain(s >= 1 && n >= 1, || format!("need s, n >= 1, got s={s}, n={n}"))?;
    ensure_domain(zeta >= 1 && zeta <= s, || format!("need 1 <= zeta <= s, got zeta={zeta}, s={s}"))?;
    let (seed, stream_id) = (rng.seed(), rng.stream_id());
    let mag = 1.0 / (zeta as f64).sqrt();
    let mut rows = Vec::with_capacity(n * zeta);
    let mut vals = Vec::with_capacity(n * zeta);
    for _ in 0..n {
        rows.extend(rng.sample_without_replacement(s, zeta));
        vals.extend((0..zeta).map(|_| mag * rng.sign()));
    }
    Ok(Embedding {
        kind: EmbeddingKind::SparseSign,
        s,
        n,
        seed,
        stream_id,
        repr: Repr::Sparse { zeta, rows, vals },
    })
}

/// Builds any kind; `zeta` defaults to [`default_zeta`].
pub fn build(kind: EmbeddingKind, s: usize, n: usize, zeta: Option<usize>, rng: &mut RngStream) -> Result<Embedding> {
    match kind {
        EmbeddingKind::Gaussian => build_gaussian(s, n, rng),
        EmbeddingKind::Srtt => build_srtt(s, n, rng),
        EmbeddingKind::SparseSign => build_sparse_sign(s, n, zeta.unwrap_or_else(|| default_zeta(s)), rng),
    }
}

impl Embedding {
    pub fn kind(&self) -> EmbeddingKind {
        self.kind
    }

    /// Embedding dimension.
    pub fn s(&self) -> usize {
        self.s
    }

    /// Ambient dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// `(seed, stream_id)` of the stream the map was drawn from.
    pub fn origin(&self) -> (u64, u64) {
        (self.seed, self.stream_id)
    }

    pub fn zeta(&self) -> Option<usize> {
        match &self.repr {
            Repr::Sparse { zeta, .. } => Some(*zeta),
            _ => None,
        }
    }

    pub fn row_sample(&self) -> Option<&[usize]> {
        match &self.repr {
            Repr::Srtt { rows, .. } => Some(rows),
            _ => None,
        }
    }

    pub fn sign_diagonal(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Srtt { signs, .. } => Some(signs),
            _ => None,
        }
    }

    /// Row indices and values of column `j` of a sparse sign map.
    pub fn sparse_column(&self, j: usize) -> Option<(&[usize], &[f64])> {
        match &self.repr {
            Repr::Sparse { zeta, rows, vals } => {
                Some((&rows[j * zeta..(j + 1) * zeta], &vals[j * zeta..(j + 1) * zeta]))
            }
            _ => None,
        }
    }

    /// `Φ x`
    pub fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "embedding ambient dimension mismatch");
        match &self.repr {
            Repr::Gaussian(g) => g.matvec(x),
            Repr::Srtt { rows, signs, dct } => {
                let dx: Vec<f64> = x.iter().zip(signs).map(|(a, b)| a * b).collect();
                let f = dct.transform(&dx);
                let c = (self.n as f64 / self.s as f64).sqrt();
                rows.iter().map(|&r| c * f[r]).collect()
            }
            Repr::Sparse { zeta, rows, vals } => {
                let mut y = vec![0.0; self.s];
                for (j, &xj) in x.iter().enumerate() {
                    if xj != 0.0 {
                        for t in j * zeta..(j + 1) * zeta {
                            y[rows[t]] += vals[t] * xj;
                        }
                    }
                }
                y
            }
        }
    }

    /// `Φ X` for an `n × k` block.
    pub fn apply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        ensure_dims(x.rows() == self.n, || {
            format!("embedding expects {} rows, got {}", self.n, x.rows())
        })?;
        if let Repr::Gaussian(g) = &self.repr {
            return g.matmul(x);
        }
        let cols: Vec<Vec<f64>> = (0..x.cols()).map(|j| self.apply_vec(x.column(j))).collect();
        DenseMatrix::from_columns(&cols, self.s)
    }

    /// Dense `s × n` matrix of the map.
    pub fn to_dense(&self) -> DenseMatrix {
        match &self.repr {
            Repr::Gaussian(g) => g.clone(),
            Repr::Sparse { zeta, rows, vals } => {
                let mut out = DenseMatrix::zeros(self.s, self.n);
                for j in 0..self.n {
                    for t in j * zeta..(j + 1) * zeta {
                        out.set(rows[t], j, out.get(rows[t], j) + vals[t]);
                    }
                }
                out
            }
            Repr::Srtt { rows, signs, .. } => {
                // explicit cosine formula, independent of the transform plan
                let n = self.n;
                let c = (n as f64 / self.s as f64).sqrt();
                DenseMatrix::from_fn(self.s, n, |i, j| {
                    let k = rows[i];
                    let ck = if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
                    let angle = std::f64::consts::PI * (2 * j + 1) as f64 * k as f64 / (2 * n) as f64;
                    c * ck * angle.cos() * signs[j]
                })
            }
        }
    }
}

/// `max(σ_max(ΦU) − 1, 1 − σ_min(ΦU))` for orthonormal `U`.
pub fn distortion(e: &Embedding, u: &DenseMatrix) -> Result<f64> {
    ensure_dims(u.rows() == e.n(), || format!("basis has {} rows, embedding ambient {}", u.rows(), e.n()))?;
    ensure_domain(u.cols() >= 1, || "basis must have at least one column".into())?;
    let defect = orthonormality_defect(u);
    if defect > 1e-10 {
        return Err(RnlaError::NotOrthonormal(defect));
    }
    let sv = singular_values(&e.apply(u)?);
    let smax = sv.first().copied().unwrap_or(0.0);
    // ΦU has fewer rows than columns when s < d, so σ_min is zero
    let smin = if sv.len() < u.cols() { 0.0 } else { *sv.last().unwrap() };
    Ok((smax - 1.0).max(1.0 - smin))
}

/// `⌈d/ε²⌉`
pub fn embedding_dim_for(d: usize, eps: f64) -> Result<usize> {
    ensure_domain(eps > 0.0 && eps <= 1.0, || format!("eps must lie in (0, 1], got {eps}"))?;
    Ok(ceil_count(d as f64 / (eps * eps)))
}
