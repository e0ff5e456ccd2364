//! Seeded random streams.
//!
//! Everything random in the crate draws from [`SimRng`]. Independent work
//! items (an opponent in dataset generation, a pair in the benchmark) get
//! their own ChaCha stream so results do not depend on scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Stream `index` of the generator keyed by `seed`.
pub fn stream(seed: u64, index: u64) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Child generator seeded from the next output of `rng`.
pub fn fork(rng: &mut SimRng) -> SimRng {
    SimRng::seed_from_u64(rng.next_u64())
}
