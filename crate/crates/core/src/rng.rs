//! Deterministic, platform-stable random stream derivation.
//!
//! Every randomized component draws from its own ChaCha8 stream keyed by
//! (master seed, purpose tag, entity indices or key hash). Derivation uses
//! SplitMix64 and FNV-1a only — never std's process-randomized hashers — so
//! identical inputs produce identical results across runs, platforms, and
//! thread counts.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags keeping unrelated streams statistically independent.
pub mod purpose {
    pub const SPLIT: u64 = 0x5350_4C49;
    pub const WALK: u64 = 0x57_41_4C_4B;
    pub const SGNS_INIT: u64 = 0x494E_4954;
    pub const SGNS_TRAIN: u64 = 0x5347_4E53;
    pub const SYNTH: u64 = 0x53_59_4E;
    pub const FOLD: u64 = 0x46_4F_4C_44;
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fold a seed and a list of parts into one well-mixed 64-bit key.
pub fn derive(seed: u64, parts: &[u64]) -> u64 {
    let mut h = splitmix64(seed);
    for &p in parts {
        h = splitmix64(h ^ p);
    }
    h
}

/// Independent ChaCha8 stream for (seed, parts).
pub fn stream(seed: u64, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, parts))
}

/// FNV-1a over a string key; stable stand-in for hashing user/track ids.
pub fn key_hash(s: &str) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in s.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// In-place Fisher–Yates with a pinned implementation (independent of any
/// library's shuffle internals, so the byte layout of splits never drifts).
pub fn shuffle<T, R: rand::Rng>(items: &mut [T], rng: &mut R) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}
