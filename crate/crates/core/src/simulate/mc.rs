//! Seeded Monte Carlo: per-replicate ChaCha substreams, an optional rayon
//! pool, and an in-order reduction so results do not depend on the number
//! of workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::Domain;
use crate::levy_models::LevyModel;
use crate::simulate::{sample_realization, Realization};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Executor {
    Sequential,
    /// Falls back to sequential when built without the `parallel` feature.
    Parallel { workers: usize },
}

impl Executor {
    pub fn from_workers(workers: usize) -> Executor {
        if workers <= 1 {
            Executor::Sequential
        } else {
            Executor::Parallel { workers }
        }
    }

    /// `f(0), …, f(n-1)` in index order.
    pub fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match *self {
            Executor::Sequential => (0..n).map(f).collect(),
            Executor::Parallel { workers } => par_map(workers, n, f),
        }
    }
}

/// Replicates per rayon task; single replicates are too cheap to schedule.
#[cfg(feature = "parallel")]
const MIN_CHUNK: usize = 16;

#[cfg(feature = "parallel")]
fn par_map<T, F>(workers: usize, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        // indexed collect keeps index order whatever the scheduling
        Ok(pool) => pool.install(|| (0..n).into_par_iter().with_min_len(MIN_CHUNK).map(&f).collect()),
        Err(_) => (0..n).map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn par_map<T, F>(_workers: usize, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// The RNG of replicate `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Run `f` once per replicate on its own substream.
pub fn replicate_map<T, F>(exec: Executor, replicates: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync + Send,
{
    exec.map(replicates, |i| {
        let mut rng = stream_rng(seed, i as u64);
        f(&mut rng, i)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MCReport {
    pub estimate: f64,
    pub std_error: f64,
    pub replicates: usize,
    pub target: Option<f64>,
}

impl MCReport {
    /// Mean and standard error by Welford's recurrence, in sample order.
    pub fn from_samples(samples: &[f64], target: Option<f64>) -> Result<MCReport> {
        if samples.len() < 2 {
            return Err(Error::Domain(format!("need at least 2 replicates, got {}", samples.len())));
        }
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for (i, &x) in samples.iter().enumerate() {
            let d = x - mean;
            mean += d / (i + 1) as f64;
            m2 += d * (x - mean);
        }
        let n = samples.len();
        let var = (m2 / (n - 1) as f64).max(0.0);
        Ok(MCReport {
            estimate: mean,
            std_error: (var / n as f64).sqrt(),
            replicates: n,
            target,
        })
    }

    /// `|estimate − target| ≤ k·SE`, with a rounding floor for zero-variance
    /// estimators.
    pub fn within(&self, k: f64) -> bool {
        match self.target {
            Some(t) => {
                let slack = 1e-12 * t.abs().max(self.estimate.abs()).max(1.0);
                (self.estimate - t).abs() <= k * self.std_error + slack
            }
            None => true,
        }
    }

    /// One JSON line `{estimate, se, n, target, pass}` at 4·SE.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "estimate": self.estimate,
            "se": self.std_error,
            "n": self.replicates,
            "target": self.target,
            "pass": self.within(4.0),
        })
        .to_string()
    }
}

/// Mean of `functional` over seeded realizations.
pub fn mc_estimate<F>(
    model: &LevyModel,
    domain: &Domain,
    replicates: usize,
    seed: u64,
    exec: Executor,
    target: Option<f64>,
    functional: F,
) -> Result<MCReport>
where
    F: Fn(&Realization) -> f64 + Sync + Send,
{
    if replicates < 2 {
        return Err(Error::Domain(format!("need at least 2 replicates, got {replicates}")));
    }
    model.sampler()?;
    let values = replicate_map(exec, replicates, seed, |rng, i| {
        sample_realization(model, domain, rng).map(|mut r| {
            r.seed = seed;
            r.stream = i as u64;
            functional(&r)
        })
    });
    let values = values.into_iter().collect::<Result<Vec<_>>>()?;
    MCReport::from_samples(&values, target)
}
