//! Seeded random streams with explicit worker derivation.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A deterministic random stream with an explicit 64-bit seed lineage.
///
/// Parallel work derives one stream per worker as `root ^ k`, so results
/// are a function of the root seed alone, independent of how many threads
/// end up executing the work.
#[derive(Debug, Clone)]
pub struct SeedStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Stream for worker `k` under `root`; worker 0 coincides with the
    /// root stream.
    pub fn worker(root: u64, k: u64) -> Self {
        Self::new(root ^ k)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl RngCore for SeedStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}
