//! Seeded random streams.
//!
//! Every consumer (each party, the channel noise source, the adversary)
//! draws from its own ChaCha stream keyed by `(seed, stream_id)`, so adding
//! or removing one consumer never shifts the draws seen by another.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream labels used by the engine.
pub mod streams {
    pub const SENDER: u64 = 1;
    pub const RECEIVER: u64 = 2;
    pub const CHANNEL_NOISE: u64 = 3;
    pub const ADVERSARY: u64 = 4;
    /// Draws secrets for Monte-Carlo sample sets.
    pub const SAMPLER: u64 = 5;
}

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
