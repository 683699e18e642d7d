//! Seed derivation.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] whose seed is
//! derived from a single 64-bit master seed. Child seeds are produced by
//! mixing the parent with a purpose label and integer indices through the
//! SplitMix64 finalizer, so each purpose (design, permutation, noise, start
//! initialisation, ...) owns an independent stream and adding a new consumer
//! never shifts the draws of an existing one.
//!
//! Gaussian variates use `rand_distr::StandardNormal` (ziggurat). Versions
//! are pinned by `Cargo.lock`; results are reproducible for a given release.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The generator used everywhere in the crate.
pub type Rng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// A 64-bit seed that can be split into labelled child seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    pub fn new(value: u64) -> Self {
        Seed(value)
    }

    /// Child seed for a named purpose.
    pub fn child(self, label: &str) -> Seed {
        Seed(splitmix64(self.0 ^ splitmix64(fnv1a(label))))
    }

    /// Child seed for an indexed sub-stream (trial, start, cell, ...).
    pub fn index(self, i: u64) -> Seed {
        Seed(splitmix64(self.0.wrapping_add(splitmix64(i ^ 0x5851_f42d_4c95_7f2d))))
    }

    pub fn rng(self) -> Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}
