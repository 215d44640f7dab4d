//! Reproducible random streams.
//!
//! Stream `(seed, index)` is ChaCha8 keyed by `ChaCha8Rng::seed_from_u64(seed)`
//! (the rand_core PCG32 expansion of the seed into a 256-bit key), with the
//! ChaCha stream id set to `index` and the word position at zero. Streams
//! with different indices share a key but never overlap, and the algorithm
//! is fully specified, so draws are portable to any ChaCha8 implementation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn rng_stream(seed: u64, stream_index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_index);
    rng
}
