//! Deterministic RNG streams.
//!
//! Every random draw in the crate flows through a `ChaCha8Rng` derived from a
//! root seed plus a stream tag, so whole training runs replay bit-for-bit.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer, used to spread structured (seed, tag) pairs.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a root seed and a list of stream tags.
pub fn derive_seed(root: u64, tags: &[u64]) -> u64 {
    let mut s = mix(root);
    for &t in tags {
        s = mix(s ^ mix(t));
    }
    s
}

/// Deterministic RNG for a (root, tags) stream.
pub fn stream_rng(root: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, tags))
}
