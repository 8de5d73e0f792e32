//! SplitMix64, written out so that any implementation can reproduce the
//! streams bit for bit.
//!
//! ```text
//! next():  state = state + 0x9E3779B97F4A7C15        (mod 2^64)
//!          z = state
//!          z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9  (mod 2^64)
//!          z = (z ^ (z >> 27)) * 0x94D049BB133111EB  (mod 2^64)
//!          return z ^ (z >> 31)
//! ```
//!
//! Per-path seeds are the SplitMix64 stream of the master seed:
//! `seed(i) = mix64(master + (i + 1) * 0x9E3779B97F4A7C15)`, and the path
//! generator starts from `state = seed(i)`.

use serde::{Deserialize, Serialize};

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The SplitMix64 output finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedPlan {
    pub master_seed: u64,
}

impl SeedPlan {
    pub fn new(master_seed: u64) -> Self {
        SeedPlan { master_seed }
    }

    pub fn path_seed(&self, index: u64) -> u64 {
        mix64(
            self.master_seed
                .wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)),
        )
    }

    pub fn rng(&self, index: u64) -> PathRng {
        PathRng::new(self.path_seed(index))
    }
}

#[derive(Debug, Clone)]
pub struct PathRng {
    state: u64,
}

impl PathRng {
    pub fn new(seed: u64) -> Self {
        PathRng { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform on `[0, 1)` from the top 53 bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `{0, .., n-1}` by rejection: draws below
    /// `2^64 mod n` are discarded, the rest reduced mod `n`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        let threshold = n.wrapping_neg() % n;
        loop {
            let r = self.next_u64();
            if r >= threshold {
                return r % n;
            }
        }
    }
}
