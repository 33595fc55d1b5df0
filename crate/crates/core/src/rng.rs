//! Seeding helpers.
//!
//! Every stochastic routine takes an explicit `u64` seed. Work that fans out
//! (Monte-Carlo draws, repetitions, files) derives one sub-seed per item from
//! `(seed, index)` so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic sub-seed for item `index` of a stream rooted at `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(mix64(seed ^ 0x9e37_79b9_7f4a_7c15).wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

/// Sub-seed for a labelled stream, e.g. `derive_stream(seed, "noise", rep)`.
pub fn derive_stream(seed: u64, label: &str, index: u64) -> u64 {
    let tag = label
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
    derive_seed(derive_seed(seed, tag), index)
}
