//! Seeded random streams. All randomness in the crate flows from explicit
//! `u64` seeds through ChaCha8, which is portable across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed of replicate `index` under a base seed: `seed · 10⁶ + index`.
pub fn replicate_seed(seed: u64, index: u64) -> u64 {
    seed.wrapping_mul(1_000_000).wrapping_add(index)
}
