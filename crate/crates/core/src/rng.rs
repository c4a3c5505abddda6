//! Seeded, portable pseudo-random stream for scene generation.
//!
//! The generator is xoshiro256** seeded from a 64-bit value through
//! SplitMix64 (the reference seeding procedure). Derived values use fixed
//! bit-level recipes so other implementations can reproduce them exactly:
//!
//! * `next_f64`: `(x >> 11) * 2^-53`, uniform in `[0, 1)`
//! * `next_below(n)`: high 64 bits of the 128-bit product `x * n`

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

#[derive(Debug, Clone)]
pub struct SceneRng(Xoshiro256StarStar);

impl SceneRng {
    pub fn new(seed: u64) -> Self {
        SceneRng(Xoshiro256StarStar::seed_from_u64(seed))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    #[inline]
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Integer in `[0, n)`; `n` must be positive.
    #[inline]
    pub fn next_below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        ((u128::from(self.next_u64()) * u128::from(n)) >> 64) as u64
    }
}
