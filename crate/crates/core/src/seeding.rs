//! Stateless, order-independent seed derivation.
//!
//! Everything random in an experiment is a pure function of a master seed and
//! integer coordinates, so results do not depend on scheduling.

/// SplitMix64 finaliser.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `words` into `seed` one at a time; each step is a bijection of the
/// running state for a fixed word.
pub fn mix(seed: u64, words: &[u64]) -> u64 {
    words
        .iter()
        .fold(splitmix64(seed), |acc, &w| splitmix64(acc ^ splitmix64(w.wrapping_add(0xD1B5_4A32_D192_ED03))))
}

/// Uniform draw in `[0, 1)` keyed by `(seed, i, j)`; 53 bits of resolution.
#[inline]
pub fn counter_uniform(seed: u64, i: usize, j: usize) -> f64 {
    let key = ((i as u64) << 32) ^ (j as u64);
    let bits = splitmix64(splitmix64(seed) ^ splitmix64(key));
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
