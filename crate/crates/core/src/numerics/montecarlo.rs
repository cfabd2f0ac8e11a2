//! Seeded, batch-structured Monte Carlo.
//!
//! Samples are grouped into fixed batches of [`BATCH_SIZE`]. Batch `j` draws
//! from its own ChaCha8 stream `(seed, stream = j)`, so a batch's result does
//! not depend on which thread computes it. Batch accumulators are merged in
//! batch order, which makes serial and parallel drivers agree bit-exactly.

use alloc::vec::Vec;

use libm::sqrt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Random generator handed to every sampler.
pub type McRng = ChaCha8Rng;

pub const BATCH_SIZE: u64 = 1024;

/// Mean, standard error and provenance of a Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl McEstimate {
    /// `std_error / |mean|`; infinite for a zero mean with nonzero error.
    pub fn relative_error(&self) -> f64 {
        if self.std_error == 0.0 {
            0.0
        } else {
            self.std_error / self.mean.abs()
        }
    }
}

/// Running count, mean and sum of squared deviations (Welford), mergeable
/// with Chan's pairwise formula.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct McAccumulator {
    n: u64,
    mean: f64,
    m2: f64,
}

impl McAccumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &McAccumulator) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let nf = n as f64;
        self.mean += delta * (other.n as f64 / nf);
        self.m2 += other.m2 + delta * delta * (self.n as f64 * other.n as f64 / nf);
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            f64::NAN
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    pub fn finish(&self, seed: u64) -> Result<McEstimate> {
        if self.n < 2 {
            return Err(Error::TooFewSamples(self.n));
        }
        Ok(McEstimate {
            mean: self.mean,
            std_error: sqrt(self.variance() / self.n as f64),
            n_samples: self.n,
            seed,
        })
    }
}

/// Generator for stream `stream` of run `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> McRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn batch_count(n_samples: u64) -> u64 {
    n_samples.div_ceil(BATCH_SIZE)
}

/// Accumulate batch `batch` of an `n_samples` run.
pub fn run_batch<S>(sample: &S, n_samples: u64, seed: u64, batch: u64) -> McAccumulator
where
    S: Fn(&mut McRng) -> f64 + ?Sized,
{
    let start = batch * BATCH_SIZE;
    let len = BATCH_SIZE.min(n_samples.saturating_sub(start));
    let mut rng = stream_rng(seed, batch);
    let mut acc = McAccumulator::default();
    for _ in 0..len {
        acc.push(sample(&mut rng));
    }
    acc
}

/// Fold per-batch accumulators in batch order.
pub fn merge_batches(batches: &[McAccumulator]) -> McAccumulator {
    let mut total = McAccumulator::default();
    for b in batches {
        total.merge(b);
    }
    total
}

/// Serial estimate of `E[sample]`.
pub fn mc_integrate<S>(sample: S, n_samples: u64, seed: u64) -> Result<McEstimate>
where
    S: Fn(&mut McRng) -> f64,
{
    if n_samples < 2 {
        return Err(Error::TooFewSamples(n_samples));
    }
    let batches: Vec<McAccumulator> = (0..batch_count(n_samples))
        .map(|b| run_batch(&sample, n_samples, seed, b))
        .collect();
    merge_batches(&batches).finish(seed)
}

/// Fill `out` with independent standard normal deviates.
pub fn fill_standard_normal(rng: &mut McRng, out: &mut [f64]) {
    for x in out.iter_mut() {
        *x = rng.sample(StandardNormal);
    }
}

/// `E[f(x)]` for `x` drawn from the `dim`-dimensional unit-variance
/// product Gaussian.
pub fn mc_integrate_gaussian<F>(dim: usize, f: F, n_samples: u64, seed: u64) -> Result<McEstimate>
where
    F: Fn(&[f64]) -> f64,
{
    if dim < 1 {
        return Err(Error::Invalid("dimension must be at least 1"));
    }
    mc_integrate(
        |rng| {
            let mut x = alloc::vec![0.0; dim];
            fill_standard_normal(rng, &mut x);
            f(&x)
        },
        n_samples,
        seed,
    )
}
