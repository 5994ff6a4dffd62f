//! Seeded random streams.
//!
//! Every stream is a ChaCha8 generator keyed through `seed_from_u64`, which is
//! portable across platforms. A *draw* is one 64-bit output; every sampling
//! helper below consumes exactly one draw, so run lengths are replayable from
//! the draw counter alone.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TWO_POW_NEG_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    draws: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, draws: 0, inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of 64-bit draws consumed so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.draws += 1;
        self.inner.next_u64()
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * TWO_POW_NEG_53
    }

    /// Uniform integer in `[0, n)` by multiply-shift. Bias is below `n / 2^64`.
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// Exponential variate with the given rate; always strictly positive.
    #[inline]
    pub fn exponential(&mut self, rate: f64) -> f64 {
        -self.uniform_open().ln() / rate
    }
}

/// Derives the seed of replica `k` from a base seed.
///
/// `k ↦ base + (k + 1)·φ` is injective modulo 2^64 because φ is odd, and the
/// splitmix64 finalizer is a bijection, so distinct replicas get distinct seeds.
pub fn replica_seed(base: u64, k: u64) -> u64 {
    const PHI: u64 = 0x9E37_79B9_7F4A_7C15;
    splitmix64_finalize(base.wrapping_add(k.wrapping_add(1).wrapping_mul(PHI)))
}

fn splitmix64_finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
