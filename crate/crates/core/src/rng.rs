//! Deterministic seed derivation.
//!
//! Every randomized step (partition shuffles, weight init, batch order,
//! k-means) draws from a ChaCha stream seeded through this module, so a run
//! is a pure function of the experiment seed regardless of thread schedule.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and a label path.
pub fn derive(seed: u64, path: &[u64]) -> u64 {
    let mut s = mix(seed);
    for &p in path {
        s = mix(s ^ p.wrapping_mul(0xff51_afd7_ed55_8ccd));
    }
    s
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rng_for(seed: u64, path: &[u64]) -> ChaCha8Rng {
    rng(derive(seed, path))
}
