//! Seeded random streams.
//!
//! Every random consumer gets a ChaCha20 generator keyed by a 64-bit seed and
//! a 64-bit stream id, so repetition `r` of an experiment seeded with `s`
//! always draws from stream `(s, r)` regardless of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type StreamRng = ChaCha20Rng;

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream ids reserved for sub-generators of one run.
pub mod streams {
    pub const ALGORITHM: u64 = 0;
    pub const DATA: u64 = 1;
    pub const MONTE_CARLO: u64 = 2;
    pub const SHUFFLE: u64 = 3;
    pub const PRIOR_NOISE: u64 = 4;
}

/// Derives the seed of repetition `rep` from a base seed. Distinct
/// repetitions land on distinct ChaCha keys.
pub fn repetition_seed(base: u64, rep: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = base
        .wrapping_add(rep.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
