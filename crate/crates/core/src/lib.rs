//! Randomized numerical linear algebra.
//!
//! Trace and norm estimation, matrix Monte Carlo, randomized power method and
//! SVD, randomly pivoted Cholesky, randomized Kaczmarz, subspace embeddings
//! and their least-squares applications, and randomized preconditioners.
//! Every randomized routine takes an explicit [`RngStream`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dct;
pub mod eig;
pub mod error;
pub mod generate;
pub mod leastsq;
pub mod linalg;
pub mod lowrank;
pub mod matrix;
pub mod matrix_mc;
pub mod mmio;
pub mod oracle;
pub mod precond;
pub mod rng;
pub mod sketch;
pub mod trace;

pub use error::{Result, RnlaError};
pub use generate::SpectrumSpec;
pub use matrix::DenseMatrix;
pub use oracle::{EntryOracle, LinearOperator, MatVecOracle};
pub use rng::RngStream;
