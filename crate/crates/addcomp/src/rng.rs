//! Deterministic randomness plumbing.
//!
//! All randomness in the crate flows from one top-level `u64` seed. Each
//! consumer asks for a *named substream*: the stream id is the FNV-1a hash
//! of the name, so adding a new consumer never perturbs the draws of
//! existing ones and partial pipeline reruns stay consistent.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::numeric::fnv1a64;

/// Root of the deterministic RNG tree for one pipeline run.
#[derive(Debug, Clone, Copy)]
pub struct SeedTree {
    seed: u64,
}

impl SeedTree {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent generator for the given substream name.
    pub fn stream(&self, name: &str) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(fnv1a64(name.as_bytes()));
        rng
    }

    /// Indexed substream family, e.g. one generator per sampled target.
    pub fn indexed_stream(&self, name: &str, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(fnv1a64(name.as_bytes()) ^ index.rotate_left(17));
        rng
    }
}
