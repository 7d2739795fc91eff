//! Experiment harness for the `rnla-core` algorithms.
//!
//! Each subcommand builds a problem from `--seed`, runs `--trials`
//! independent trials (trial `i` draws from substream `i`), and reports one
//! CSV row per trial and step with the measured quantity next to the
//! matching theoretical bound. Output is identical for any worker count.

pub mod args;
pub mod experiments;
pub mod report;

use std::path::PathBuf;

use rnla_core::RnlaError;
use thiserror::Error;

pub use args::{Cli, Command, ExperimentArgs};
pub use report::{Cell, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "RNLA_THREADS";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid argument: {0}")]
    Validation(String),

    #[error("cannot load matrix {}: {source}", path.display())]
    MatrixFile { path: PathBuf, source: RnlaError },

    #[error("precondition violated: {0}")]
    Core(#[from] RnlaError),

    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, BenchError>;

/// A finished experiment.
#[derive(Clone, Debug)]
pub struct Report {
    pub table: Table,
    /// Some solver hit its iteration cap or diverged.
    pub not_converged: bool,
}

impl Report {
    pub fn csv(&self) -> Vec<u8> {
        self.table.to_csv()
    }

    pub fn exit_code(&self) -> i32 {
        if self.not_converged {
            EXIT_NOT_CONVERGED
        } else {
            EXIT_OK
        }
    }
}

/// Runs a subcommand on the current rayon pool.
pub fn run(cmd: &Command) -> Result<Report> {
    experiments::dispatch(cmd)
}

/// Runs a subcommand on a dedicated pool of `threads` workers (all cores
/// when `None`).
pub fn run_with_threads(cmd: &Command, threads: Option<usize>) -> Result<Report> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| BenchError::Validation(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run(cmd))
}

/// Parses the worker cap from the environment.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(BenchError::Validation(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        },
    }
}
