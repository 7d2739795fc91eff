use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum RnlaError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("columns are not orthonormal (deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("matrix is zero; sampling probabilities are undefined")]
    ZeroMatrix,

    #[error("matrix is numerically rank deficient: {0}")]
    RankDeficient(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, RnlaError>;

pub(crate) fn ensure_domain(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(RnlaError::Domain(msg()))
    }
}

pub(crate) fn ensure_dims(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(RnlaError::Dimension(msg()))
    }
}

/// Ceiling of a sample-count formula, shaving relative round-off so that
/// values like `20.000000000000004` map to 20.
pub(crate) fn ceil_count(x: f64) -> usize {
    if x <= 0.0 {
        return 0;
    }
    let shaved = x - x * 1e-12;
    shaved.ceil() as usize
}
