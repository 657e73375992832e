//! Named sub-seed derivation.
//!
//! Every random stream in a run descends from the single master seed through
//! `(module, period, candidate)` labels, so adding a candidate never shifts
//! the randomness seen by any other.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Rng = ChaCha8Rng;

pub fn sub_seed(master: u64, module: &str, period: u32, candidate: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update((module.len() as u64).to_le_bytes());
    h.update(module.as_bytes());
    h.update(period.to_le_bytes());
    h.update((candidate.len() as u64).to_le_bytes());
    h.update(candidate.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Cheap deterministic mix of a seed with a stream index.
pub fn stream(seed: u64, index: u64) -> Rng {
    rng(sub_seed(seed, "stream", 0, &index.to_string()))
}
