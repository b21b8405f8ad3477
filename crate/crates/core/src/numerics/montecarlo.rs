//! Reproducible Monte Carlo: every replicate owns a ChaCha stream keyed by
//! `(seed, replicate index)`, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCEstimate {
    pub value: f64,
    pub std_error: f64,
    pub replications: usize,
}

impl MCEstimate {
    /// Mean and `sd / sqrt(n)` of the given values (two-pass, in order).
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "at least two replications are required, got {n}"
            )));
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        let sd = (ss / (n - 1) as f64).sqrt();
        Ok(Self {
            value: mean,
            std_error: sd / (n as f64).sqrt(),
            replications: n,
        })
    }

    /// Whether `target` lies within `k` standard errors of the estimate.
    pub fn covers(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error
    }
}

/// Generator for replicate `index` under `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs `reps` replicates of a `dim`-valued function and returns all values,
/// row-major by replicate. `workers == 1` runs inline; `0` uses the global pool.
pub fn mc_samples<F>(f: F, dim: usize, reps: usize, seed: u64, workers: usize) -> Result<Vec<f64>>
where
    F: Fn(u64, &mut ChaCha8Rng, &mut [f64]) + Sync,
{
    if reps < 2 {
        return Err(Error::InvalidParameter(format!(
            "at least two replications are required, got {reps}"
        )));
    }
    if dim == 0 {
        return Ok(Vec::new());
    }
    let mut out = vec![0.0; reps * dim];
    let run = |(i, chunk): (usize, &mut [f64])| {
        let mut rng = stream_rng(seed, i as u64);
        f(i as u64, &mut rng, chunk);
    };
    if workers == 1 {
        out.chunks_mut(dim).enumerate().for_each(run);
    } else if workers == 0 {
        out.par_chunks_mut(dim).enumerate().for_each(run);
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
        pool.install(|| out.par_chunks_mut(dim).enumerate().for_each(run));
    }
    if let Some(pos) = out.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteReplicate {
            index: (pos / dim) as u64,
        });
    }
    Ok(out)
}

/// Mean and standard error of a scalar replicate function.
pub fn mc_mean<F>(f: F, reps: usize, seed: u64, workers: usize) -> Result<MCEstimate>
where
    F: Fn(u64, &mut ChaCha8Rng) -> f64 + Sync,
{
    let values = mc_samples(|i, rng, out| out[0] = f(i, rng), 1, reps, seed, workers)?;
    MCEstimate::from_values(&values)
}

/// Component-wise mean and standard error of a vector replicate function.
pub fn mc_mean_vec<F>(
    f: F,
    dim: usize,
    reps: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<MCEstimate>>
where
    F: Fn(u64, &mut ChaCha8Rng, &mut [f64]) + Sync,
{
    let values = mc_samples(f, dim, reps, seed, workers)?;
    column_estimates(&values, dim)
}

pub(crate) fn column_estimates(values: &[f64], dim: usize) -> Result<Vec<MCEstimate>> {
    (0..dim)
        .map(|k| {
            let col: Vec<f64> = values.iter().skip(k).step_by(dim).copied().collect();
            MCEstimate::from_values(&col)
        })
        .collect()
}
