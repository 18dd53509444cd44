//! Seed derivation.
//!
//! Every random quantity is drawn from a ChaCha stream identified by
//! `(master seed, domain, index)`. Paths, replicates and model components
//! each get their own stream, so results never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream domains. Distinct domains never share key material.
pub mod domain {
    pub const SERIES: u64 = 1;
    pub const VOLATILITY: u64 = 2;
    pub const FACTOR: u64 = 3;
    pub const PLUG_IN: u64 = 4;
    pub const PATHS: u64 = 5;
    pub const ORACLE: u64 = 6;
}

pub fn stream(seed: u64, domain: u64, index: u64) -> StreamRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Uniform draw on the half-open interval (0, 1].
#[inline]
pub(crate) fn open_unit<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}
