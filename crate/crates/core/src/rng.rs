//! Deterministic random streams.
//!
//! Every stream used anywhere in a run is a ChaCha8 generator seeded from a
//! 64-bit value derived from the master seed and a path of integer labels
//! (run, method, slot, role). The derivation folds each label into the state
//! with the SplitMix64 finalizer, so streams for different paths are
//! decorrelated while remaining a pure function of the master seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Role labels for the last component of a seed path.
pub mod role {
    pub const SPLIT: u64 = 1;
    pub const BOOTSTRAP: u64 = 2;
    pub const EVOLVE: u64 = 3;
    pub const PRUNE: u64 = 4;
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `labels` into `master` one at a time.
pub fn derive_seed(master: u64, labels: &[u64]) -> u64 {
    labels
        .iter()
        .fold(splitmix64(master), |acc, &label| splitmix64(acc ^ splitmix64(label)))
}

pub fn stream(master: u64, labels: &[u64]) -> Stream {
    ChaCha8Rng::seed_from_u64(derive_seed(master, labels))
}
