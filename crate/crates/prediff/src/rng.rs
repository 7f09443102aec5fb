//! Deterministic random stream derivation.
//!
//! Every run consumes one user-facing seed; independent substreams are
//! derived per (scale, region) so scheduling order never affects results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn stream(seed: u64, scale: u32, region: u32, tag: u8) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..12].copy_from_slice(&scale.to_le_bytes());
    key[12..16].copy_from_slice(&region.to_le_bytes());
    key[16] = tag;
    ChaCha8Rng::from_seed(key)
}

/// Substream for per-scale work (segmentation jitter, scale bookkeeping).
pub fn scale_stream(seed: u64, scale: u32) -> ChaCha8Rng {
    stream(seed, scale, 0, 0x5c)
}

/// Substream for one region's exclusion sampling at one scale.
pub fn region_stream(seed: u64, scale: u32, region: u32) -> ChaCha8Rng {
    stream(seed, scale, region, 0x7e)
}
