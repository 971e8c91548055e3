//! Seeded random generation used by the randomized property suites.
//!
//! Everything randomized in this crate takes an explicit u64 seed (default 0
//! at the command line) and draws from ChaCha8, so runs are reproducible
//! across platforms and versions.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic generator for a given seed and stream label.
///
/// The label keeps independent suites (e.g. "simplicity" vs "leibniz")
/// decorrelated even at the same seed.
pub fn seeded(seed: u64, label: &str) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    for (i, b) in label.bytes().enumerate().take(24) {
        key[8 + i] = b;
    }
    ChaCha8Rng::from_seed(key)
}

/// Small signed rational parts: numerator in [-bound, bound], denominator in
/// [1, den_bound].
pub fn small_ratio(rng: &mut ChaCha8Rng, bound: i64, den_bound: i64) -> (i64, i64) {
    let n = rng.gen_range(-bound..=bound);
    let d = rng.gen_range(1..=den_bound);
    (n, d)
}
