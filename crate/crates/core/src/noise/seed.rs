//! Labeled seed derivation and counter-keyed Gaussian streams.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

/// Child seed for the consumer named `label`; distinct labels give unrelated streams.
pub fn derive_seed(root: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(root.to_le_bytes());
    h.update((label.len() as u64).to_le_bytes());
    h.update(label.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().unwrap())
}

/// ChaCha key for a seed within a named family of streams.
pub fn stream_key(seed: u64, family: &str) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(family.as_bytes());
    h.update([0u8]);
    h.update(seed.to_le_bytes());
    h.finalize().into()
}

/// Order-preserving map of a signed index onto a stream number.
#[inline]
pub fn stream_of(n: i64) -> u64 {
    (n as u64) ^ (1u64 << 63)
}

/// Generator positioned at the start of stream `n` for `key`.
pub fn rng_at(key: &[u8; 32], n: i64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(*key);
    rng.set_stream(stream_of(n));
    rng
}

/// `count` standard normals from stream `n`: the block for one time index.
pub fn normals_at(key: &[u8; 32], n: i64, count: usize) -> Vec<f64> {
    let mut rng = rng_at(key, n);
    (0..count).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Seeded generator for ad hoc sampling (fuzzing, random data).
pub fn rng_from(seed: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(stream_key(seed, label))
}
