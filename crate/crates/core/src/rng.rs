//! Seeded random substreams.
//!
//! Sampling work is cut into fixed-size chunks and every chunk draws from its own
//! ChaCha8 stream, addressed by `(seed, purpose, class, chunk)`. Results therefore do not
//! depend on how many threads process the chunks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::distributions::Class;

/// Samples per substream.
pub const CHUNK_SIZE: usize = 1 << 14;

/// What a stream is used for; disjoint purposes give statistically independent draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    /// Rated samples behind the analysis component and the empirical ROC curve.
    Ratings = 1,
    /// Forced-choice pairs.
    ForcedChoice = 2,
    /// Rejection-rate checks.
    Rejection = 3,
}

pub fn substream(seed: u64, purpose: Purpose, class: Option<Class>, chunk: u64) -> ChaCha8Rng {
    let class_tag = class.map_or(0, |c| c.index() as u64 + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((purpose as u64) << 56 | class_tag << 48 | chunk);
    rng
}

/// Chunk boundaries covering `n` items.
pub(crate) fn chunks(n: usize) -> impl Iterator<Item = (u64, usize)> + Clone {
    (0..n.div_ceil(CHUNK_SIZE)).map(move |c| (c as u64, CHUNK_SIZE.min(n - c * CHUNK_SIZE)))
}
