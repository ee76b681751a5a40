use std::hash::Hasher;

use fnv::FnvHasher;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A generator that depends only on `seed` and `key`, so per-document
/// sampling gives the same result whatever order documents are processed in.
pub(crate) fn keyed_rng(seed: u64, key: &str) -> ChaCha8Rng {
    let mut hasher = FnvHasher::default();
    hasher.write(key.as_bytes());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(hasher.finish());
    rng
}
