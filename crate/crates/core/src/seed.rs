//! Deterministic seed derivation.
//!
//! Every random stream in the crate is a ChaCha8 generator keyed by a 64-bit
//! seed. Sub-seeds are derived from a parent seed, a purpose label and an
//! index, so parallel work units never share a stream and results do not
//! depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    label
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

/// Derive a child seed for `(label, index)` under `parent`.
pub fn derive(parent: u64, label: &str, index: u64) -> u64 {
    let h = splitmix64(parent ^ splitmix64(fnv1a(label)));
    splitmix64(h ^ splitmix64(index.wrapping_add(0x2545_f491_4f6c_dd1d)))
}

/// Generator for the given seed.
pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for a derived stream.
pub fn stream(parent: u64, label: &str, index: u64) -> Rng {
    rng(derive(parent, label, index))
}
