//! Seeded, splittable random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator addressed
//! by a 256-bit key and a 64-bit stream number. A [`Streams`] value holds a
//! key; [`Streams::domain`] derives an independent key for a named purpose
//! (`SHA-256(parent key ‖ name)`), and [`Streams::rng`] opens one stream
//! under that key. Segment updates use [`Streams::rng2`] keyed by
//! `(iteration, segment)`, so a sweep produces the same draws whatever order
//! (or thread) the segments are visited in.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Streams {
    key: [u8; 32],
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(b"decompound/root");
        hasher.update(seed.to_le_bytes());
        Self {
            key: hasher.finalize().into(),
        }
    }

    pub fn domain(&self, name: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(self.key);
        hasher.update(name.as_bytes());
        Self {
            key: hasher.finalize().into(),
        }
    }

    pub fn rng(&self, stream: u64) -> StreamRng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(stream);
        rng
    }

    /// Stream `(major << 32) | minor`; both halves must fit in 32 bits.
    pub fn rng2(&self, major: u64, minor: u64) -> StreamRng {
        assert!(major < 1 << 32 && minor < 1 << 32, "stream index overflow");
        self.rng((major << 32) | minor)
    }
}
