/// SplitMix64 finalizer; a bijection on `u64`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial seed: `splitmix64(splitmix64(base_seed) ^ trial_index)`.
///
/// For a fixed base the map is injective in `trial_index` (xor with a
/// constant, then a bijection); hashing the base first keeps `(b, t)` and
/// `(b ^ 1, t ^ 1)` from colliding.
pub fn derive_seed(base_seed: u64, trial_index: u64) -> u64 {
    splitmix64(splitmix64(base_seed) ^ trial_index)
}

/// Seed for trial `trial` of shape number `shape` in a run. Independent
/// streams for different purposes are separated by `stream`.
pub fn trial_seed(base_seed: u64, stream: u64, shape: usize, trial: usize) -> u64 {
    derive_seed(derive_seed(derive_seed(base_seed, stream), shape as u64), trial as u64)
}
