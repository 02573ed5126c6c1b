//! Seedable sampling generator.
//!
//! All samplers draw from PCG-64 (`Lcg128Xsl64`, 128-bit LCG state with the
//! XSL-RR 64-bit output permutation) seeded through
//! `SeedableRng::seed_from_u64`. A uniform double is `(next_u64() >> 11) * 2^-53`,
//! which lies in `[0, 1)`. Nothing else in the crate consumes randomness, so a
//! `(sampler, arguments, seed)` triple fully determines the output.

use rand_core::{RngCore, SeedableRng};
use rand_pcg::Pcg64;

#[derive(Debug, Clone)]
pub struct SampleRng {
    inner: Pcg64,
}

impl SampleRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Pcg64::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..bound` (Lemire's widening multiply, unbiased).
    pub fn below(&mut self, bound: usize) -> usize {
        assert!(bound > 0);
        let bound = bound as u64;
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let m = (self.next_u64() as u128) * (bound as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as usize;
            }
        }
    }

    /// Standard normal via Box–Muller (cosine branch only).
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// `count` distinct indices from `0..n` via a partial Fisher–Yates shuffle.
    pub fn choose_distinct(&mut self, n: usize, count: usize) -> Vec<usize> {
        assert!(count <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..count {
            let j = i + self.below(n - i);
            pool.swap(i, j);
        }
        pool.truncate(count);
        pool
    }
}
