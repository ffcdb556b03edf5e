//! Counter-addressed random streams.
//!
//! A stream is fully determined by `(seed, label, sub, index)`, so trajectory
//! `i` draws the same numbers no matter how trajectories are scheduled.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamFamily {
    seed: u64,
    label: u64,
    sub: u64,
}

impl StreamFamily {
    pub fn new(seed: u64, label: u64) -> Self {
        Self { seed, label, sub: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent family; distinct `tag`s give disjoint keys.
    pub fn child(&self, tag: u64) -> Self {
        Self {
            seed: self.seed,
            label: self.label,
            sub: mix(self.sub ^ mix(tag.wrapping_add(0x9e37_79b9_7f4a_7c15))),
        }
    }

    pub fn stream(&self, index: u64) -> RandomStream {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.label.to_le_bytes());
        key[16..24].copy_from_slice(&self.sub.to_le_bytes());
        key[24..].copy_from_slice(b"treewalk");
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(index);
        RandomStream { rng }
    }
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit tag for a textual label.
pub fn label_of(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x100_0000_01b3)
    })
}

#[derive(Clone, Debug)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `0..n` from a single draw (multiply-high, bias below `n / 2^64`).
    pub fn below(&mut self, n: u64) -> u64 {
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// Uniform on `[0, 1)` with 53 bits.
    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
