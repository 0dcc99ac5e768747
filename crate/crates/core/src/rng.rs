//! Seedable, splittable random streams.
//!
//! Every random quantity in the crate is drawn from a [`RandomStream`], a
//! `(seed, stream_id)` pair that maps onto an independent ChaCha8 stream.
//! Streams form a tree through [`RandomStream::child`], so a Monte Carlo
//! replication, a measurement set inside it, and a row inside that set each
//! get their own generator, and results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifies one reproducible random sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Derives the `index`-th sub-stream. Distinct `(self, index)` pairs give
    /// distinct keys, so children never share a ChaCha key/stream pair.
    pub fn child(&self, index: u64) -> RandomStream {
        RandomStream {
            seed: splitmix64(self.seed ^ splitmix64(self.stream_id.wrapping_add(0x6a09_e667_f3bc_c909))),
            stream_id: index,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
