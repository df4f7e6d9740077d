//! Seed derivation.
//!
//! Every random choice in the engine is driven by a `ChaCha8Rng` whose seed is
//! derived from the master seed and a tuple of labels. Work items therefore
//! produce the same numbers no matter which thread runs them or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Hashes `(master, tag, key, index)` into a 64-bit seed.
pub fn derive_seed(master: u64, tag: &str, key: u64, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update((tag.len() as u64).to_le_bytes());
    h.update(tag.as_bytes());
    h.update(key.to_le_bytes());
    h.update(index.to_le_bytes());
    let out = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&out[..8]);
    u64::from_le_bytes(bytes)
}

/// 64-bit digest of a sorted id set, used as a cache and seed key.
pub fn id_set_digest(tag: &str, ids: &[usize]) -> u64 {
    let mut h = Sha256::new();
    h.update(tag.as_bytes());
    h.update((ids.len() as u64).to_le_bytes());
    for &id in ids {
        h.update((id as u64).to_le_bytes());
    }
    let out = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&out[..8]);
    u64::from_le_bytes(bytes)
}
