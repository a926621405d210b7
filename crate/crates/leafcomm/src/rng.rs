//! Deterministic randomness plumbing.
//!
//! Every randomized operation in the crate draws from a ChaCha12 stream
//! derived from a single 64-bit seed plus a stream label.  Two runs with the
//! same seed see byte-identical randomness regardless of evaluation order,
//! which is what makes the randomized #SAT and learning suites reproducible.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Labels for independent streams split off a master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    FormulaGen,
    ProtocolSample,
    LearnerExamples,
    Boosting,
    PrgSampling,
    Suite,
    /// Free-form label for test harnesses.
    Custom(u64),
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::FormulaGen => 1,
            Stream::ProtocolSample => 2,
            Stream::LearnerExamples => 3,
            Stream::Boosting => 4,
            Stream::PrgSampling => 5,
            Stream::Suite => 6,
            Stream::Custom(x) => 0x1000 + x,
        }
    }
}

/// A ChaCha12 generator on the given stream of the master seed.
pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    rng
}

/// Sub-stream for the `index`-th independent task of a stream.
pub fn task_rng(seed: u64, stream: Stream, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream.id().wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ index);
    rng
}
