//! Per-trial, per-stage random streams.
//!
//! Every stage of every trial gets its own ChaCha stream: the key comes from
//! the master seed and the stream id from `(n, trial, stage)`. Streams never
//! overlap, so results do not depend on scheduling, and skipping a stage
//! leaves every other stage's randomness unchanged.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Pipeline stage that consumes randomness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Stage {
    Message = 1,
    Synthesis = 2,
    Substitution = 3,
    InsertionDeletion = 4,
}

const fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic generator for one stage of one trial.
pub fn stage_rng(master_seed: u64, n: usize, trial: u64, stage: Stage) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut state = master_seed;
    for chunk in key.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    let id = splitmix64(splitmix64(n as u64 ^ (u64::from(stage as u8) << 56)) ^ trial);
    rng.set_stream(id);
    rng
}
