use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{LinfBox, Vector};

/// A reproducible random source addressed by `(seed, path)`.
///
/// Sub-streams are derived by appending labels to the path, so the draws for
/// trial 7 / coordinate 3 do not depend on how many draws trial 6 made.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RandomStream {
    seed: u64,
    path: Vec<u64>,
}

// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        RandomStream {
            seed,
            path: Vec::new(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    pub fn child(&self, label: u64) -> Self {
        let mut path = self.path.clone();
        path.push(label);
        RandomStream {
            seed: self.seed,
            path,
        }
    }

    fn key(&self) -> u64 {
        self.path.iter().fold(mix(self.seed), |acc, &label| {
            mix(acc ^ mix(label.wrapping_add(0x5851_f42d)))
        })
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.key())
    }

    /// A point drawn uniformly from an ℓ∞ box.
    pub fn uniform_in_box(&self, b: &LinfBox) -> Vector {
        let mut rng = self.rng();
        uniform_in_box(&mut rng, b)
    }
}

pub(crate) fn uniform_in_box<R: Rng>(rng: &mut R, b: &LinfBox) -> Vector {
    Vector::from_raw(
        b.center
            .iter()
            .map(|c| c + b.radius * rng.random_range(-1.0..=1.0))
            .collect(),
    )
}

/// Hands out one sub-stream per query: query `k` draws from `base.child(k)`.
#[derive(Debug)]
pub struct QueryStreams {
    base: RandomStream,
    next: AtomicU64,
}

impl QueryStreams {
    pub fn new(base: RandomStream) -> Self {
        QueryStreams {
            base,
            next: AtomicU64::new(0),
        }
    }

    pub fn next_stream(&self) -> RandomStream {
        self.base.child(self.next.fetch_add(1, Ordering::Relaxed))
    }

    pub fn base(&self) -> &RandomStream {
        &self.base
    }

    pub fn issued(&self) -> u64 {
        self.next.load(Ordering::Relaxed)
    }
}

impl Clone for QueryStreams {
    fn clone(&self) -> Self {
        QueryStreams {
            base: self.base.clone(),
            next: AtomicU64::new(self.issued()),
        }
    }
}
