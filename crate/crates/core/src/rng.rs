//! Seed derivation for reproducible trial streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream whose seed is
//! derived from a master seed plus a list of integer tags (cell index, trial
//! index, purpose). The derivation is a splitmix64 fold, so the same master
//! seed and tags give the same stream on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One splitmix64 step; advances the state and returns the mixed output.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Folds `tags` into `master`, producing an independent stream seed.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut state = master;
    let mut out = splitmix64(&mut state);
    for &tag in tags {
        state ^= tag.wrapping_mul(0xd1342543de82ef95).wrapping_add(1);
        out = splitmix64(&mut state);
    }
    out
}

/// Seeded ChaCha8 stream; the generator behind every label and test draw.
pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
