//! Seed derivation for repeated trials.
//!
//! Trial `i` of a run with master seed `s` uses
//! `splitmix64(s + (i + 1) · 0x9E3779B97F4A7C15)`. Each trial seed depends
//! only on the master seed and its own index, so appending trials leaves the
//! earlier ones untouched.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// One round of the SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}
