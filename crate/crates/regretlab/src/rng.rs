//! Deterministic per-replicate random streams.
//!
//! One master seed; each replicate gets its own counter-indexed ChaCha
//! stream, so a simulation partitions identically across any number of
//! workers.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}
