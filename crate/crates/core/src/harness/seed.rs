//! Counter-based per-trial seeding.
//!
//! Every trial seed is a SplitMix64 hash of `(master_seed, p, trial_index)`,
//! and each random purpose within a trial gets its own derived stream, so no
//! two trials or purposes share an RNG and the schedule of parallel workers
//! cannot influence any draw.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn trial_seed(master_seed: u64, p: f64, trial_index: usize) -> u64 {
    // +0.0 and -0.0 are the same probability
    let p_bits = if p == 0.0 { 0 } else { p.to_bits() };
    let mut h = splitmix64(master_seed);
    h = splitmix64(h ^ p_bits);
    splitmix64(h ^ trial_index as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Scene = 1,
    Interferers = 2,
    Noise = 3,
}

pub fn stream_seed(trial_seed: u64, stream: Stream) -> u64 {
    splitmix64(trial_seed ^ (stream as u64).wrapping_mul(GOLDEN))
}
