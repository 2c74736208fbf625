//! Deterministic random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream addressed by
//! `(seed, cell, replicate)`:
//!
//! * the 256-bit ChaCha key is four SplitMix64 outputs of a state initialised
//!   from `seed` and `cell`,
//! * the ChaCha stream id (nonce) is `replicate`.
//!
//! Any replicate of any simulation cell can therefore be regenerated on its own,
//! in any order and on any thread, and yields the same numbers. Normal variates
//! are drawn with the ziggurat sampler of `rand_distr::StandardNormal`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type Stream = ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Returns the stream for one replicate of one cell.
pub fn stream(seed: u64, cell: u64, replicate: u64) -> Stream {
    let mut state = seed ^ cell.wrapping_mul(GOLDEN).rotate_left(17);
    // one extra round so that (seed, cell) and (cell, seed) do not collide
    state = splitmix64(&mut state) ^ cell;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(replicate);
    rng
}

/// Folds a list of words into a cell identifier.
///
/// Used by the harness to address cells by their parameters rather than by
/// their position in a spec, so the same `(eta, p, N)` cell sees the same data
/// whichever spec it appears in.
pub fn cell_id(words: &[u64]) -> u64 {
    let mut state = 0x243f_6a88_85a3_08d3u64;
    let mut acc = 0u64;
    for &w in words {
        state ^= w;
        acc = splitmix64(&mut state) ^ acc.rotate_left(23);
    }
    acc
}
