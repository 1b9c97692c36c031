//! Seeded random streams.
//!
//! Every random quantity in the crate is drawn from a [`RcmRng`], which is
//! ChaCha with 8 rounds (`rand_chacha::ChaCha8Rng`). The ChaCha keystream is
//! specified bit-for-bit, so a given seed produces the same numbers on every
//! platform. Independent trials get independent streams through
//! [`derive_seed`], which hashes `(master, index)` with the SplitMix64
//! finalizer.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RcmRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for stream `index` under `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(mix64(master).wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn stream(seed: u64) -> RcmRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream for trial `index` of an experiment seeded with `master`.
pub fn trial_stream(master: u64, index: u64) -> RcmRng {
    stream(derive_seed(master, index))
}
