//! Deterministic random number generation.
//!
//! One explicitly seeded generator per run; there is no global or
//! thread-local randomness anywhere in the crate. The stream is ChaCha8
//! (a documented, platform-independent algorithm), seeded through the
//! standard SplitMix64 expansion of a 64-bit seed, so identical seeds
//! produce bitwise-identical draw sequences on every platform.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded random generator. Single-owner by contract: concurrent use of one
/// instance is not supported.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    stream: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng {
            seed,
            stream: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// The seed this generator was constructed with.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.stream.next_u64()
    }

    /// Uniform draw from [0, 1) using the top 53 bits of the stream, so the
    /// mapping to `f64` is exact and implementation-defined by us alone.
    pub fn next_f64(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (self.next_u64() >> 11) as f64 * SCALE
    }

    /// Uniform draw from [-scale, +scale].
    pub fn uniform(&mut self, scale: f64) -> f64 {
        (self.next_f64() * 2.0 - 1.0) * scale
    }

    /// Uniform draw from {0, 1, ..., n-1}.
    ///
    /// Plain modulo reduction; the bias for n far below 2^64 is negligible
    /// for shuffling and sampling purposes and keeps the draw sequence
    /// trivially reproducible.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0) is undefined");
        (self.next_u64() % n as u64) as usize
    }

    /// Bernoulli draw: true with probability `p`.
    pub fn chance(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}
