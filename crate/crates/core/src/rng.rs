//! Deterministic random streams.
//!
//! Parallel work never shares a generator: each task derives its own stream
//! from the master seed and a task index, so results do not depend on how
//! tasks are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Independent stream `index` under `master_seed`.
pub fn stream(master_seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Stream for a two-level task key such as `(cell, replicate)`.
pub fn substream(master_seed: u64, outer: u64, inner: u64) -> StreamRng {
    stream(master_seed ^ outer.wrapping_mul(0x9E37_79B9_7F4A_7C15), inner)
}
