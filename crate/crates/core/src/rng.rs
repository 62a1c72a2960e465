//! Seeded random stream with deterministic substreams.
//!
//! A stream is a ChaCha8 generator keyed by a 64-bit seed. Substreams keep the
//! key of the parent seed mixed with a label and select a distinct ChaCha
//! stream number, so `(seed, label)` pairs map to independent sequences
//! without any shared state.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

/// SplitMix64 finalizer.
fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derives an independent stream from `(seed, label)`.
    ///
    /// The result depends only on the parent seed and the label, never on how
    /// many draws the parent has produced.
    pub fn substream(&self, label: u64) -> Self {
        let derived = mix64(self.seed ^ mix64(label.wrapping_add(0x5EED)));
        let mut inner = ChaCha8Rng::seed_from_u64(derived);
        inner.set_stream(label);
        Self {
            seed: derived,
            inner,
        }
    }

    /// Substream addressed by two labels, e.g. `(iteration, individual)`.
    pub fn substream2(&self, a: u64, b: u64) -> Self {
        self.substream(mix64(a).wrapping_add(b))
    }

    /// Uniform draw on the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        loop {
            let u: f64 = self.inner.random();
            if u > 0.0 {
                return u;
            }
        }
    }

    pub fn std_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// Exponential with rate 1.
    pub fn exp1(&mut self) -> f64 {
        Exp1.sample(&mut self.inner)
    }

    /// Integer uniform on the inclusive range `[low, high]`.
    pub fn uniform_int(&mut self, low: usize, high: usize) -> usize {
        self.inner.random_range(low..=high)
    }

    pub fn sample<T, D: Distribution<T>>(&mut self, dist: &D) -> T {
        dist.sample(&mut self.inner)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}
