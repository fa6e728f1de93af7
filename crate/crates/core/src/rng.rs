//! Splittable seeded random streams and the block-parallel pulse driver.
//!
//! A [`SeedStream`] is a 64-bit key. Child streams are derived by mixing
//! the parent key with an index, so a scan point, a pulse block, or a
//! bootstrap replicate each get their own independent generator that does
//! not depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Generator used for every simulated pulse.
pub type PulseRng = ChaCha8Rng;

/// Number of pulses simulated from one block stream.
pub const BLOCK_PULSES: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedStream(u64);

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        SeedStream(seed)
    }

    pub fn key(&self) -> u64 {
        self.0
    }

    /// Independent child stream number `index`.
    pub fn child(&self, index: u64) -> Self {
        SeedStream(splitmix64(self.0 ^ splitmix64(index ^ 0xa076_1d64_78bd_642f)))
    }

    pub fn rng(&self) -> PulseRng {
        ChaCha8Rng::seed_from_u64(splitmix64(self.0))
    }
}

/// Simulates `pulses` independent pulses with `pulse`, in blocks of
/// [`BLOCK_PULSES`] that each own `stream.child(block)`. Output order and
/// values are identical for any rayon thread count.
pub fn simulate_pulses<T, F>(pulses: usize, stream: SeedStream, pulse: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut PulseRng) -> T + Sync,
{
    let blocks = pulses.div_ceil(BLOCK_PULSES);
    let chunks: Vec<Vec<T>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * BLOCK_PULSES;
            let len = BLOCK_PULSES.min(pulses - start);
            let mut rng = stream.child(b as u64).rng();
            (0..len).map(|_| pulse(&mut rng)).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(pulses);
    for chunk in chunks {
        out.extend(chunk);
    }
    out
}

/// Pairwise (tree) summation with a fixed split order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n if n <= 32 => values.iter().sum(),
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}
