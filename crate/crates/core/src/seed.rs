//! Deterministic seed derivation.
//!
//! Every stochastic component draws from a seed derived from a master seed
//! and a path of indices, so results do not depend on scheduling order.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `parent` and a stream index.
pub fn derive(parent: u64, index: u64) -> u64 {
    splitmix64(parent ^ splitmix64(index.wrapping_add(GOLDEN)))
}

/// Derives a child seed from a path of indices.
pub fn derive_path(parent: u64, path: &[u64]) -> u64 {
    path.iter().fold(parent, |acc, &i| derive(acc, i))
}

/// Order-sensitive hash of a sequence of floats (by bit pattern).
pub fn hash_f64s<'a>(values: impl IntoIterator<Item = &'a f64>) -> u64 {
    values.into_iter().fold(0x243F_6A88_85A3_08D3, |acc, v| {
        splitmix64(acc ^ v.to_bits())
    })
}
