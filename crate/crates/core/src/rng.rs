//! Seeded, splittable random streams.
//!
//! Every consumer of randomness gets its own ChaCha stream derived from a
//! master seed, a [`Domain`] and an index, so the result of any episode is
//! independent of how work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// What a random stream is used for. Distinct domains never share a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    /// Weight initialization and training episodes of one hierarchy level.
    TrainLevel = 1,
    /// Held-out series used to measure per-level prediction loss.
    Evaluation = 2,
    /// Paired test episodes shared by every detector.
    TestEpisode = 3,
    /// Demo episode.
    Demo = 4,
    /// Free for tests and ad-hoc use.
    Scratch = 15,
}

/// Returns the stream for `(master, domain, index)`.
///
/// `index` must fit in 56 bits.
pub fn stream(master: u64, domain: Domain, index: u64) -> StreamRng {
    debug_assert!(index < 1 << 56);
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((domain as u64) << 56) | index);
    rng
}
