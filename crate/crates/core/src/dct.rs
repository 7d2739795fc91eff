//! Orthonormal DCT-II.
//!
//! `y_k = c_k Σ_j x_j cos(π(2j+1)k / 2n)` with `c_0 = √(1/n)` and
//! `c_k = √(2/n)` otherwise. Small lengths use a dense cosine table; longer
//! ones use Makhoul's reordering and a complex FFT of the same length.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

/// Lengths at or above this use the FFT path.
pub const FAST_THRESHOLD: usize = 512;

enum Plan {
    Dense(Vec<f64>),
    Fast { fft: Arc<dyn Fft<f64>>, twiddle: Vec<Complex<f64>> },
}

pub struct Dct2 {
    n: usize,
    plan: Plan,
}

impl std::fmt::Debug for Dct2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.plan {
            Plan::Dense(_) => "dense",
            Plan::Fast { .. } => "fft",
        };
        f.debug_struct("Dct2").field("n", &self.n).field("plan", &kind).finish()
    }
}

fn scale(n: usize, k: usize) -> f64 {
    if k == 0 {
        (1.0 / n as f64).sqrt()
    } else {
        (2.0 / n as f64).sqrt()
    }
}

impl Dct2 {
    pub fn new(n: usize) -> Self {
        if n < FAST_THRESHOLD {
            Self::dense(n)
        } else {
            Self::fast(n)
        }
    }

    /// Dense `O(n²)` plan regardless of length.
    pub fn dense(n: usize) -> Self {
        let mut table = vec![0.0; n * n];
        for k in 0..n {
            let c = scale(n, k);
            for j in 0..n {
                // row k, stored row-major
                table[k * n + j] = c * (PI * (2 * j + 1) as f64 * k as f64 / (2 * n) as f64).cos();
            }
        }
        Self { n, plan: Plan::Dense(table) }
    }

    /// FFT plan regardless of length.
    pub fn fast(n: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(n);
        let twiddle = (0..n)
            .map(|k| {
                let theta = -PI * k as f64 / (2 * n) as f64;
                Complex::new(theta.cos(), theta.sin()) * scale(n, k)
            })
            .collect();
        Self { n, plan: Plan::Fast { fft, twiddle } }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "dct length mismatch");
        let n = self.n;
        match &self.plan {
            Plan::Dense(table) => (0..n)
                .map(|k| table[k * n..(k + 1) * n].iter().zip(x).map(|(c, v)| c * v).sum())
                .collect(),
            Plan::Fast { fft, twiddle } => {
                let mut v = vec![Complex::new(0.0, 0.0); n];
                for j in 0..n.div_ceil(2) {
                    v[j].re = x[2 * j];
                }
                for j in 0..n / 2 {
                    v[n - 1 - j].re = x[2 * j + 1];
                }
                fft.process(&mut v);
                v.iter().zip(twiddle).map(|(a, w)| (a * w).re).collect()
            }
        }
    }
}
