//! Seeded random streams.
//!
//! Every stochastic step in the crate draws from a [`Stream`], which is
//! ChaCha20 (RFC 8439 block function, 64-bit counter) keyed from a 64-bit
//! seed through `SeedableRng::seed_from_u64`. Independent sub-streams (per
//! cross-validation run and fold, per SDAE layer) are keyed by
//! [`derive_seed`], so work can be scheduled in any order without changing
//! results.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// The crate-wide random stream.
pub type Stream = ChaCha20Rng;

/// Open a stream keyed by `seed`.
pub fn stream(seed: u64) -> Stream {
    ChaCha20Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer (Steele, Lea & Flood 2014).
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a sub-seed from a master seed and two coordinates.
///
/// `derive_seed(m, a, b) = mix64(mix64(mix64(m) ^ a) ^ b)`.
pub fn derive_seed(master: u64, a: u64, b: u64) -> u64 {
    mix64(mix64(mix64(master) ^ a) ^ b)
}
