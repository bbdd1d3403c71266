//! Seeded random streams.
//!
//! Every independent unit of work (a tree in a forest, a partition in a
//! benchmark, a repetition in a consistency run) gets its own ChaCha stream
//! keyed by `(seed, stream_id)`, so results never depend on scheduling order or
//! thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

pub fn stream(seed: u64, stream_id: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Stream id for a two-level key, e.g. (sample size index, repetition).
pub fn pair_id(major: u64, minor: u64) -> u64 {
    (major << 32) | (minor & 0xffff_ffff)
}
