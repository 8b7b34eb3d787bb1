//! Deterministic seed derivation.
//!
//! Every trial seed is a pure function of `(master, point, trial)`, computed by
//! chaining the SplitMix64 finalizer. Trials can therefore run in any order or on
//! any number of threads and still see the same random numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `trial` at campaign point `point`.
pub fn trial_seed(master: u64, point: u64, trial: u64) -> u64 {
    mix64(mix64(mix64(master) ^ point) ^ trial.wrapping_mul(GOLDEN))
}

/// Independent random streams used inside one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Channel,
    Payload,
    Noise,
}

/// Generator for one purpose (and user) of a trial. Streams differ by ChaCha
/// stream id, so they never overlap.
pub fn stream(seed: u64, purpose: Purpose, user: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tag = match purpose {
        Purpose::Channel => 1u64,
        Purpose::Payload => 2,
        Purpose::Noise => 3,
    };
    rng.set_stream((tag << 32) | user as u64);
    rng
}
