//! Seed derivation.
//!
//! Every random draw in the crate comes from a `ChaCha8Rng` seeded with a
//! `u64`. Sub-tasks (child nodes, repetitions, data vs. fit streams) get
//! their own seed derived from the parent seed and a tag, so the same
//! stream is produced no matter which thread or order runs the task.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Tags for seed streams that hang off one parent seed.
pub mod stream {
    pub const LEFT: u64 = 1;
    pub const RIGHT: u64 = 2;
    pub const FALLBACK: u64 = 3;
    pub const DATA: u64 = 10;
    pub const SPLIT: u64 = 11;
    pub const FIT: u64 = 12;
    pub const REPETITION: u64 = 100;
}

/// Splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for `(parent, tag)`.
pub fn derive(parent: u64, tag: u64) -> u64 {
    mix(mix(parent.wrapping_add(0x9e37_79b9_7f4a_7c15)) ^ tag.wrapping_mul(0xd6e8_feb8_6659_fd93))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
