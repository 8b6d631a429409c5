//! Deterministic seed derivation.
//!
//! Every random stream in the pipeline is keyed by a tuple of integers mixed
//! into the master seed, so no component ever shares RNG state with another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `parts` into `base`, order-sensitively.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(mix64(base ^ GOLDEN), |acc, &p| {
        mix64(acc.wrapping_add(GOLDEN).wrapping_add(mix64(p)))
    })
}

pub fn rng_from(base: u64, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, parts))
}

/// Domain tags so that the same numeric ids never collide across purposes.
pub(crate) mod tag {
    pub const SUITE_SPLIT: u64 = 1;
    pub const FUNCTION: u64 = 2;
    pub const RUN: u64 = 3;
    pub const ELA: u64 = 4;
    pub const SBP_SAMPLING: u64 = 5;
}
