//! Seed derivation helpers.
//!
//! Every randomized operation takes one master seed and derives an
//! independent ChaCha stream per use site, so results do not depend on
//! evaluation order or worker count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 step, used to whiten tag hashes into seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF29CE484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001B3);
    }
    h
}

/// Derive a sub-seed for a named use site from the master seed.
pub fn derive_seed(master: u64, tag: &str) -> u64 {
    splitmix64(master ^ fnv1a(tag.as_bytes()))
}

/// A ChaCha generator on stream `stream` of the given seed.
///
/// Streams of the same seed are statistically independent, which makes
/// per-row or per-generation generators safe to create in parallel.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Deterministic value in [0, 1) from a seed and a 2-D cell coordinate.
pub fn unit_at(seed: u64, x: u64, y: u64) -> f64 {
    let h = splitmix64(seed ^ x.wrapping_mul(0x9E3779B97F4A7C15) ^ y.wrapping_mul(0xD1B54A32D192ED03));
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
