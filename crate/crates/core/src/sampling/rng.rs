use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A reproducible random stream identified by `(base_seed, stream_id)`.
///
/// Replicate `i` of an experiment runs on `root.child(i)`, so results do not
/// depend on the order in which replicates are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeededRng {
    pub base_seed: u64,
    pub stream_id: u64,
}

impl SeededRng {
    pub fn new(base_seed: u64) -> Self {
        Self { base_seed, stream_id: 0 }
    }

    pub fn with_stream(base_seed: u64, stream_id: u64) -> Self {
        Self { base_seed, stream_id }
    }

    /// A stream derived from this one; distinct indices give independent
    /// streams, and `child` of a child never collides with a sibling.
    pub fn child(&self, index: u64) -> Self {
        Self {
            base_seed: splitmix64(self.base_seed ^ splitmix64(self.stream_id.wrapping_add(0x5851_f42d))),
            stream_id: index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(self.base_seed));
        rng.set_stream(self.stream_id);
        rng
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}
