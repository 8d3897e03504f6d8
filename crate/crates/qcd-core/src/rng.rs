//! Deterministic per-trial random number streams.
//!
//! Every simulated trial owns a ChaCha8 stream derived from
//! `(master_seed, trial_index, purpose)`. Trials are therefore independent of
//! scheduling: any number of workers, in any order, reproduce the same draws.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 step; used only to expand seeds, never as the trial generator.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the ChaCha stream for one `(master_seed, trial_index, purpose)`
/// triple. `purpose` separates e.g. detection batches from run-length batches
/// so they never share draws.
pub fn trial_rng(master_seed: u64, trial_index: u64, purpose: u64) -> ChaCha8Rng {
    let mut state = master_seed
        ^ trial_index.wrapping_mul(0xa076_1d64_78bd_642f)
        ^ purpose.wrapping_mul(0xe703_7ed1_a0b4_28db);
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}
