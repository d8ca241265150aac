//! Portable seeded random stream.
//!
//! The generator is SplitMix64. Derived quantities are defined so that any
//! implementation of SplitMix64 reproduces them exactly:
//!
//! * uniform: `((next_u64() >> 11) + 1) · 2⁻⁵³`, a value in `(0, 1]`;
//! * normal: Box–Muller on two consecutive uniforms `u₁, u₂`,
//!   `√(−2 ln u₁) · cos(2π u₂)` (the sine branch is discarded);
//! * index below `n`: `next_u64() % n`.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

/// Increment used to derive independent per-stream seeds.
const STREAM_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Clone, Debug)]
pub struct PortableRng {
    inner: SplitMix64,
}

impl PortableRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: SplitMix64::seed_from_u64(seed),
        }
    }

    /// Generator for sub-stream `index` of `seed`; used to give restarts and
    /// trials their own reproducible stream regardless of execution order.
    pub fn stream(seed: u64, index: u64) -> Self {
        Self::new(seed ^ index.wrapping_add(1).wrapping_mul(STREAM_GAMMA))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `(0, 1]`.
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal variate.
    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform index in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0);
        (self.next_u64() % n as u64) as usize
    }

    /// `k` distinct indices from `0..n`, drawn by a partial Fisher–Yates
    /// shuffle and returned sorted.
    pub fn subset(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below(n - i);
            pool.swap(i, j);
        }
        let mut out = pool[..k].to_vec();
        out.sort_unstable();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // published SplitMix64 outputs for seed 1234567
        let mut rng = PortableRng::new(1234567);
        assert_eq!(rng.next_u64(), 6457827717110365317);
        assert_eq!(rng.next_u64(), 3203168211198807973);
    }

    #[test]
    fn uniform_range_and_normal_moments() {
        let mut rng = PortableRng::new(7);
        let mut sum = 0.0;
        let mut sq = 0.0;
        let n = 20_000;
        for _ in 0..n {
            let u = rng.uniform();
            assert!(u > 0.0 && u <= 1.0);
            let z = rng.normal();
            sum += z;
            sq += z * z;
        }
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.03, "{mean}");
        assert!((var - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn subsets_are_sorted_and_distinct() {
        let mut rng = PortableRng::new(3);
        for _ in 0..100 {
            let s = rng.subset(9, 4);
            assert_eq!(s.len(), 4);
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            assert!(s.iter().all(|&i| i < 9));
        }
    }

    #[test]
    fn streams_differ() {
        let a = PortableRng::stream(5, 0).next_u64();
        let b = PortableRng::stream(5, 1).next_u64();
        assert_ne!(a, b);
    }
}
