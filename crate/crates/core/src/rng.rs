//! Counter-based uniform draws.
//!
//! Every randomized quantity in the detection pipeline is a pure function of
//! `(run seed, sequence, s, t, u)`, so results do not depend on evaluation
//! order or thread count.

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash a sequence of words into one 64-bit key.
pub fn key_hash(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x6a09_e667_f3bc_c909, |acc, &w| splitmix64(acc ^ splitmix64(w)))
}

/// Uniform draw in the open interval (0, 1) keyed by `(seed, n, s, t, u)`.
///
/// Indices are absolute positions in the full series so that a window keeps
/// its draw across recursion levels.
pub fn keyed_uniform(seed: u64, n: usize, s: usize, t: usize, u: usize) -> f64 {
    let h = key_hash(&[seed, n as u64, s as u64, t as u64, u as u64]);
    ((h >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Seed for the `rep`-th replication of a Monte-Carlo study.
pub fn derive_seed(seed: u64, rep: u64) -> u64 {
    key_hash(&[seed, 0x5eed, rep])
}
