use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Addresses one ChaCha8 stream: the key comes from `master_seed`, the stream
/// number from `stream_id`. Equal pairs reproduce bitwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self { master_seed, stream_id }
    }

    /// Sub-stream `k` of this stream; children of distinct parents or with distinct
    /// `k` land on distinct ids with overwhelming probability.
    pub fn child(&self, k: u64) -> Self {
        let id = splitmix64(self.stream_id ^ splitmix64(k.wrapping_add(0x5851_f42d_4c95_7f2d)));
        Self { master_seed: self.master_seed, stream_id: id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}
