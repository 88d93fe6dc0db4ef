//! Deterministic RNG stream derivation.
//!
//! Every independent unit of randomness (a node's neighborhood in a given
//! epoch, a Monte-Carlo trial, a weight initialisation) gets its own ChaCha
//! stream keyed by a tuple of integers, so results do not depend on the
//! order in which work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream tags used to keep unrelated consumers of the same seed apart.
pub mod tag {
    pub const SPLIT: u64 = 0x5350_4c49;
    pub const GRAPH: u64 = 0x4752_4150;
    pub const FEATURES: u64 = 0x4645_4154;
    pub const INIT: u64 = 0x494e_4954;
    pub const SAMPLE: u64 = 0x5341_4d50;
    pub const PROBE: u64 = 0x5052_4f42;
    pub const THEORY: u64 = 0x5448_454f;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Builds the RNG for the stream identified by `seed` and `path`.
pub fn stream(seed: u64, path: &[u64]) -> StreamRng {
    let mut state = splitmix64(seed);
    for &p in path {
        state = splitmix64(state ^ splitmix64(p.wrapping_add(0x632b_e59b_d9b4_e019)));
    }
    let mut key = [0u8; 32];
    for (i, chunk) in key.chunks_mut(8).enumerate() {
        state = splitmix64(state.wrapping_add(i as u64));
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
