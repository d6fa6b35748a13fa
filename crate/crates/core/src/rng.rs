//! Reproducible random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream keyed by a
//! [`SeedSpec`]. Distinct `(master_seed, stream_id)` pairs are mixed through
//! SplitMix64 into independent 256-bit keys, so parallel workers can each take
//! their own stream without coordination.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    #[serde(default)]
    pub stream_id: u64,
}

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mix(a: u64, b: u64) -> u64 {
    let mut s = a ^ b.rotate_left(32).wrapping_mul(0xD6E8_FEB8_6659_FD93);
    splitmix64(&mut s)
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// Sub-stream tagged by `tag`; deterministic and distinct per tag.
    pub fn derive(&self, tag: u64) -> Self {
        Self {
            master_seed: self.master_seed,
            stream_id: mix(self.stream_id, tag.wrapping_add(1)),
        }
    }

    pub fn rng(&self) -> StreamRng {
        let mut state = mix(self.master_seed, 0x5EED) ^ self.stream_id;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }
}

impl From<u64> for SeedSpec {
    fn from(master_seed: u64) -> Self {
        Self::new(master_seed, 0)
    }
}
