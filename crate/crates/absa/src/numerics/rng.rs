//! Deterministic random number generation.
//!
//! Every stochastic step in the pipeline (parameter init, shuffling, dropout,
//! noise sampling, bootstrap resampling) draws from an [`RngState`] seeded
//! from the run seed. Sub-streams are derived by hashing a string tag into a
//! child seed, so adding a consumer to one phase never shifts the draws seen
//! by another phase, and per-instance streams are independent of processing
//! order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::tensor::Tensor;

/// 64-bit FNV-1a. Used for seed derivation and for content hashes of corpus
/// and vocabulary files.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Seeded generator with cheap derivation of independent sub-streams.
#[derive(Debug, Clone)]
pub struct RngState {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngState {
    pub fn new(seed: u64) -> RngState {
        RngState {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// The seed this state was created from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// A fresh generator whose seed is derived from this state's seed and a
    /// tag. Derivation uses only the seed, not the current stream position,
    /// so the same `(seed, tag)` always yields the same child.
    pub fn derive(&self, tag: &str) -> RngState {
        let mut bytes = self.seed.to_le_bytes().to_vec();
        bytes.extend_from_slice(tag.as_bytes());
        RngState::new(fnv1a64(&bytes))
    }

    /// Like [`derive`](Self::derive) but additionally keyed by an index, for
    /// per-iteration or per-instance streams.
    pub fn derive_indexed(&self, tag: &str, index: u64) -> RngState {
        let mut bytes = self.seed.to_le_bytes().to_vec();
        bytes.extend_from_slice(tag.as_bytes());
        bytes.extend_from_slice(&index.to_le_bytes());
        RngState::new(fnv1a64(&bytes))
    }

    /// Uniform draw from `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    /// Uniform draw from `{0, 1, ..., n-1}`.
    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    /// Bernoulli draw with success probability `p`.
    pub fn coin(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    /// Fill a tensor with independent U[lo, hi) draws.
    pub fn fill_uniform(&mut self, t: &mut Tensor, lo: f64, hi: f64) {
        for x in t.data_mut() {
            *x = self.rng.gen_range(lo..hi);
        }
    }

    /// A vector of `n` independent N(0, sigma^2) draws. `sigma == 0` returns
    /// zeros without consuming any randomness.
    pub fn gaussian(&mut self, n: usize, sigma: f64) -> Vec<f64> {
        if sigma == 0.0 {
            return vec![0.0; n];
        }
        let normal = Normal::new(0.0, sigma).expect("sigma is finite and non-negative");
        (0..n).map(|_| normal.sample(&mut self.rng)).collect()
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.rng.gen_range(0..=i);
            xs.swap(i, j);
        }
    }

    /// Sample `k` distinct indices from `0..n` (all of them if `k >= n`),
    /// returned in increasing order.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        if k >= n {
            return (0..n).collect();
        }
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = self.rng.gen_range(i..n);
            pool.swap(i, j);
        }
        let mut picked = pool[..k].to_vec();
        picked.sort_unstable();
        picked
    }
}
