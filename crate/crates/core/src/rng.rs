//! Seed derivation and reproducible random streams.
//!
//! Every generator is a ChaCha8 stream cipher (`rand_chacha::ChaCha8Rng`)
//! keyed with `seed_from_u64(seed)` and positioned on a 64-bit stream id.
//! ChaCha8 output is defined by its specification, so identical
//! `(seed, stream)` pairs yield identical bits on every platform. Stream ids
//! are partitioned by [`Domain`] in the high 16 bits so that hyperplane
//! generation never shares a stream with sampling.
//!
//! Derived seeds (per trial, per median-of-means group) go through the
//! SplitMix64 finalizer applied to `seed ^ splitmix(a) ^ rotl(splitmix(b), 17)`.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

/// Disjoint stream namespaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u16)]
pub enum Domain {
    Hyperplanes = 1,
    Sampling = 2,
    Fixture = 3,
}

/// Generator for stream `id` of `domain` under `seed`.
pub fn stream(seed: u64, domain: Domain, id: u64) -> ChaCha8Rng {
    debug_assert!(id < (1 << 48));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((domain as u64) << 48) | (id & ((1 << 48) - 1)));
    rng
}

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for the pair `(a, b)` under `seed`.
pub fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    splitmix64(seed ^ splitmix64(a) ^ splitmix64(b).rotate_left(17))
}
