//! Seeded random streams.
//!
//! Every random quantity in the crate is drawn from ChaCha8 keyed by
//! `seed_from_u64(seed)`, with a fixed stream id per purpose. ChaCha is a
//! counter-based generator, so a `(seed, purpose)` pair yields the same numbers
//! on every platform and independently of thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Which consumer a random stream belongs to. Distinct purposes never share
/// a stream even when they share a seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Graph = 1,
    Permutation = 2,
    Direction = 3,
    Weights = 4,
}

pub fn stream(seed: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose as u64);
    rng
}
