//! Seed derivation.
//!
//! Every random stream in the crate is a [`ChaCha8Rng`] whose 64-bit seed is
//! mixed from a master seed and a small tuple of indices with SplitMix64.
//! Streams therefore depend only on `(master, domain, index)` and never on
//! scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Recorded in run manifests so other implementations can reproduce streams.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng(rand_chacha 0.3) seeded via SplitMix64(master, domain, index)";

/// Domain tags keep unrelated streams apart even for equal indices.
pub mod domain {
    pub const SPLIT: u64 = 0x5350_4c49_5400_0001;
    pub const RESTART: u64 = 0x5245_5354_4152_5402;
    pub const SWEEP_CELL: u64 = 0x5357_4545_5000_0003;
    pub const SYNTHETIC: u64 = 0x5359_4e54_4800_0004;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a master seed and a path of indices.
pub fn derive_seed(master: u64, domain: u64, path: &[u64]) -> u64 {
    let mut s = splitmix64(master ^ splitmix64(domain));
    for &p in path {
        s = splitmix64(s ^ splitmix64(p.wrapping_add(0x632b_e59b_d9b4_e019)));
    }
    s
}

pub fn stream(master: u64, domain: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, domain, path))
}
