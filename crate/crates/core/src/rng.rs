//! Seed handling. Every stochastic component takes an explicit `u64` seed and
//! builds its own ChaCha stream, so runs are reproducible and independent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of one Monte-Carlo run from the master seed and the
/// (power index, run index) pair.
pub fn derive_seed(master: u64, power_index: u64, run_index: u64) -> u64 {
    let s = splitmix64(master);
    let s = splitmix64(s ^ power_index.wrapping_mul(0xD6E8_FEB8_6659_FD93));
    splitmix64(s ^ run_index.wrapping_mul(0xA076_1D64_78BD_642F))
}
