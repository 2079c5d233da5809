//! Seed derivation.
//!
//! Every random stream in a run is a ChaCha8 generator keyed by a 64-bit seed
//! plus a stream label, so independent stages never share draws and the whole
//! pipeline is reproducible across platforms and thread counts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream labels for the stages of a single run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Trace = 1,
    GroundTruth = 2,
    Mask = 3,
    Training = 4,
    RandomPlacement = 5,
    Graph = 6,
    Communities = 7,
    Crp = 8,
    TablePermutation = 9,
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fold a sequence of words into one seed. Order matters.
pub fn derive(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x5EED_CAFE_F00D_u64, |acc, &p| mix64(acc ^ mix64(p)))
}

pub fn rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(seed: u64, stream: Stream) -> SimRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream as u64);
    r
}

/// Sub-stream for a stage that runs once per index (per SBS, per community).
pub fn indexed_stream(seed: u64, stream: Stream, index: usize) -> SimRng {
    let mut r = ChaCha8Rng::seed_from_u64(derive(&[seed, index as u64]));
    r.set_stream(stream as u64);
    r
}
