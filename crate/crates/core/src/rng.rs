//! Seed derivation.
//!
//! Every random draw in the crate comes from a [`ChaCha20Rng`], a counter-mode
//! generator, keyed by a 64-bit seed. Independent sub-streams are obtained by
//! hashing the parent seed together with a textual label (and optionally an
//! index), so results never depend on the order in which streams are consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type StreamRng = ChaCha20Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// Derives the seed of the sub-stream `label` of `seed`.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    splitmix64(splitmix64(seed) ^ fnv1a(label.as_bytes()))
}

/// Derives the seed of element `index` of the sub-stream `label` of `seed`.
pub fn derive_indexed_seed(seed: u64, label: &str, index: u64) -> u64 {
    splitmix64(derive_seed(seed, label) ^ splitmix64(index.wrapping_add(1)))
}

pub fn stream(seed: u64, label: &str) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(seed, label))
}

pub fn indexed_stream(seed: u64, label: &str, index: u64) -> StreamRng {
    StreamRng::seed_from_u64(derive_indexed_seed(seed, label, index))
}
