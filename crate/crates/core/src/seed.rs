//! Per-frame random streams.
//!
//! Frame `i` of a run with master seed `s` draws from a ChaCha8 stream keyed
//! by `frame_seed(s, i) = splitmix64(s + splitmix64(i))`, so every frame's
//! noise is fixed by `(s, i)` alone and the order or thread a frame runs on
//! never matters.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn frame_seed(master_seed: u64, frame_index: u64) -> u64 {
    splitmix64(master_seed.wrapping_add(splitmix64(frame_index)))
}

pub fn frame_rng(master_seed: u64, frame_index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(frame_seed(master_seed, frame_index))
}
