//! Seeded, splittable random streams.
//!
//! Every randomized routine takes an explicit [`RngStream`]. A stream is
//! identified by `(seed, stream_id)`; the underlying generator is ChaCha8,
//! which is counter based, so a stream can be re-positioned and two streams
//! with different ids never overlap. Per-sample randomness is drawn from
//! [`RngStream::substream`], which makes ensemble results independent of
//! the order in which samples are evaluated.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matrix::DenseMatrix;

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

// SplitMix64 finalizer; a bijection on u64.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn key_from_seed(seed: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    let mut state = seed;
    for chunk in key.chunks_exact_mut(8) {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        chunk.copy_from_slice(&mix64(state).to_le_bytes());
    }
    key
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::from_seed(key_from_seed(seed));
        inner.set_stream(stream_id);
        Self { seed, stream_id, inner }
    }

    pub fn from_seed(seed: u64) -> Self {
        Self::new(seed, 0)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of 32-bit words consumed so far.
    pub fn counter(&self) -> u64 {
        self.inner.get_word_pos() as u64
    }

    /// Child stream `k`. Depends only on `(seed, stream_id, k)`, not on how
    /// much of the parent has been consumed, and is injective in `k`.
    pub fn substream(&self, k: u64) -> RngStream {
        // x -> mix64(x) is a bijection and so is x -> h + x, so the child id
        // is injective in k for a fixed parent.
        let h = mix64(self.stream_id ^ 0xa076_1d64_78bd_642f);
        RngStream::new(self.seed, mix64(h.wrapping_add(k)))
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Rademacher variable.
    pub fn sign(&mut self) -> f64 {
        if self.inner.next_u32() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        self.inner.random_range(0..n)
    }

    pub fn normal_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.normal()).collect()
    }

    pub fn sign_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.sign()).collect()
    }

    /// Matrix with i.i.d. standard normal entries, filled column by column.
    pub fn normal_matrix(&mut self, rows: usize, cols: usize) -> DenseMatrix {
        let data = self.normal_vec(rows * cols);
        DenseMatrix::from_col_major(rows, cols, data).expect("finite gaussian draws")
    }

    /// `k` distinct indices from `0..n`, uniformly at random, by partial
    /// Fisher–Yates. Returned in draw order.
    pub fn sample_without_replacement(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot draw {k} distinct items from {n}");
        let mut perm: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below(n - i);
            perm.swap(i, j);
        }
        perm.truncate(k);
        perm
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
