//! Tolerances and reproducible sampling.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Slack used by every verifier.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub h_min: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-8,
            rel: 1e-6,
            h_min: 1e-6,
        }
    }
}

impl Tolerance {
    /// `abs + rel * max(scale, 1)`.
    pub fn allowance(&self, scale: f64) -> f64 {
        self.abs + self.rel * scale.abs().max(1.0)
    }

    /// Rejects non-positive fields; differential checkers need all three.
    pub fn validate_strict(&self) -> Result<()> {
        for (name, v) in [("abs", self.abs), ("rel", self.rel), ("h_min", self.h_min)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::ParamOutOfRange { name, value: v });
            }
        }
        Ok(())
    }
}

/// Seed and sample count for a randomized check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SampleSpec {
    pub seed: u64,
    pub count: usize,
}

impl SampleSpec {
    pub fn new(seed: u64, count: usize) -> Self {
        SampleSpec { seed, count }
    }

    pub fn sampler(&self) -> Sampler {
        Sampler::new(self.seed)
    }
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec {
            seed: 0x5eed,
            count: 500,
        }
    }
}

/// Deterministic stream of uniform draws (ChaCha8).
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform on `[lo, hi)`; returns `lo` when the range is empty.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if hi > lo {
            self.rng.gen_range(lo..hi)
        } else {
            lo
        }
    }

    pub fn unit(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    /// Uniformly distributed unit vector in `R^n`.
    pub fn direction(&mut self, n: usize) -> Vec<f64> {
        if n == 1 {
            return alloc::vec![if self.rng.gen::<bool>() { 1.0 } else { -1.0 }];
        }
        loop {
            let v: Vec<f64> = (0..n).map(|_| self.uniform(-1.0, 1.0)).collect();
            let r = crate::math::norm(&v);
            if r > 1e-3 && r <= 1.0 {
                return v.into_iter().map(|x| x / r).collect();
            }
        }
    }
}
