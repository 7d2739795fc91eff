use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Randomized linear algebra experiments: run each method on synthetic or
/// supplied problems and compare measured errors with theoretical bounds.
#[derive(Parser, Debug, Clone)]
#[command(name = "rnla-bench", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Hutchinson trace estimation against the Chebyshev failure bound.
    Trace(ExperimentArgs),
    /// Column-sampling approximation of A Aᵀ against the matrix Monte Carlo bound.
    Matmul(ExperimentArgs),
    /// Entrywise sparsification.
    Sparsify(ExperimentArgs),
    /// Randomized power method against the gap and gapless bounds.
    Power(ExperimentArgs),
    /// Randomized SVD / subspace iteration against the Frobenius bound.
    Rsvd(ExperimentArgs),
    /// Randomly pivoted Cholesky against the trace-norm bound.
    Rpcholesky(ExperimentArgs),
    /// Randomized Kaczmarz against its contraction bound.
    Kaczmarz(ExperimentArgs),
    /// Sketch-and-solve least squares.
    #[command(name = "sketch-ls")]
    SketchLs(ExperimentArgs),
    /// Iterative sketching for least squares.
    #[command(name = "iter-sketch")]
    IterSketch(ExperimentArgs),
    /// Sketched whitening.
    Whiten(ExperimentArgs),
    /// Sketched approximate null space.
    Nullspace(ExperimentArgs),
    /// Nyström-preconditioned conjugate gradients versus plain CG.
    #[command(name = "precond-cg")]
    PrecondCg(ExperimentArgs),
    /// Measured distortion of subspace embeddings.
    #[command(name = "embed-check")]
    EmbedCheck(ExperimentArgs),
    /// Randomized joint diagonalization of commuting pairs.
    Jointdiag(ExperimentArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Trace(_) => "trace",
            Command::Matmul(_) => "matmul",
            Command::Sparsify(_) => "sparsify",
            Command::Power(_) => "power",
            Command::Rsvd(_) => "rsvd",
            Command::Rpcholesky(_) => "rpcholesky",
            Command::Kaczmarz(_) => "kaczmarz",
            Command::SketchLs(_) => "sketch-ls",
            Command::IterSketch(_) => "iter-sketch",
            Command::Whiten(_) => "whiten",
            Command::Nullspace(_) => "nullspace",
            Command::PrecondCg(_) => "precond-cg",
            Command::EmbedCheck(_) => "embed-check",
            Command::Jointdiag(_) => "jointdiag",
        }
    }

    pub fn args(&self) -> &ExperimentArgs {
        match self {
            Command::Trace(a)
            | Command::Matmul(a)
            | Command::Sparsify(a)
            | Command::Power(a)
            | Command::Rsvd(a)
            | Command::Rpcholesky(a)
            | Command::Kaczmarz(a)
            | Command::SketchLs(a)
            | Command::IterSketch(a)
            | Command::Whiten(a)
            | Command::Nullspace(a)
            | Command::PrecondCg(a)
            | Command::EmbedCheck(a)
            | Command::Jointdiag(a) => a,
        }
    }
}

/// Shared flags. Unset values fall back to per-experiment defaults.
#[derive(Args, Debug, Clone, Default)]
pub struct ExperimentArgs {
    /// Primary dimension (rows, or size of a square matrix).
    #[arg(long)]
    pub n: Option<usize>,
    /// Column count / subspace dimension.
    #[arg(long)]
    pub d: Option<usize>,
    /// Secondary row dimension.
    #[arg(long)]
    pub m: Option<usize>,
    /// Sample count or embedding dimension.
    #[arg(long)]
    pub s: Option<usize>,
    /// Rank or null-space dimension.
    #[arg(long)]
    pub k: Option<usize>,
    /// Target rank.
    #[arg(long)]
    pub r: Option<usize>,
    /// Iteration count.
    #[arg(long = "T")]
    pub t: Option<usize>,
    /// Spectral ratio (e.g. λ₂/λ₁).
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Intrinsic dimension of the synthetic trace problem.
    #[arg(long)]
    pub intdim: Option<f64>,
    /// Accuracy parameter.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Relative tail or stopping threshold.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Ridge shift.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Solver tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Solver iteration cap.
    #[arg(long)]
    pub maxit: Option<usize>,
    /// Condition number of the synthetic matrix.
    #[arg(long)]
    pub cond: Option<f64>,
    /// Number of independent trials.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Embedding kind: gaussian, srtt, sparse_sign.
    #[arg(long)]
    pub kind: Option<String>,
    /// Nonzeros per column for sparse sign embeddings.
    #[arg(long)]
    pub zeta: Option<usize>,
    /// Test vector distribution: signs, sphere, gaussian.
    #[arg(long)]
    pub dist: Option<String>,
    /// Sampling rule: weighted or uniform.
    #[arg(long)]
    pub sampling: Option<String>,
    /// Input matrix in MatrixMarket format.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Output CSV path (default stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}
