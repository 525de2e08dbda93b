//! Counter-based random streams.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] keyed by
//! `(seed, index)` and positioned on a numbered stream. Two draws with
//! different `(seed, index, stream)` triples never share key material, so
//! batches can be split across workers in any order and still reproduce
//! bit for bit.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named substreams. The numeric values are part of the reproducibility
/// contract; do not renumber.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Substream {
    ExitTime = 1,
    ExitLabel = 2,
    Trajectory = 3,
    Sampling = 4,
    Bridge = 5,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and a name, e.g. one seed per
/// pipeline stage from the single top-level seed.
pub fn derive_seed(seed: u64, name: &str) -> u64 {
    let mut state = seed ^ 0xD1B5_4A32_D192_ED03;
    for b in name.bytes() {
        state ^= u64::from(b);
        splitmix64(&mut state);
    }
    splitmix64(&mut state)
}

/// Generator for event/trajectory `index` on `stream`.
pub fn stream(seed: u64, index: u64, stream: Substream) -> ChaCha8Rng {
    let mut state = seed;
    let a = splitmix64(&mut state);
    state ^= index.wrapping_mul(0xA24B_AED4_963E_E407);
    let b = splitmix64(&mut state);
    let c = splitmix64(&mut state);
    let d = splitmix64(&mut state);
    let mut key = [0u8; 32];
    for (chunk, word) in key.chunks_exact_mut(8).zip([a, b, c, d]) {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream as u64);
    rng
}
