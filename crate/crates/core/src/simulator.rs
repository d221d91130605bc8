//! Monte Carlo sampling of the independent reference model: items are drawn
//! i.i.d. from the popularity until the collection target is reached.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::numerics::{Accumulator, Scalar};
use crate::popularity::Popularity;

/// Generator recorded in outputs so runs can be reproduced.
pub const GENERATOR_NAME: &str = "chacha20";

#[derive(Clone, Copy, Debug)]
pub struct SimConfig {
    pub samples: u64,
    pub seed: u64,
    /// Per-sample trial cap; `None` resolves to `1000 * n`.
    pub k_cap: Option<u64>,
}

impl SimConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self {
            samples,
            seed,
            k_cap: None,
        }
    }

    pub fn with_k_cap(mut self, k_cap: u64) -> Self {
        self.k_cap = Some(k_cap);
        self
    }

    fn resolve_k_cap(&self, n: usize) -> u64 {
        self.k_cap.unwrap_or(1000 * n as u64)
    }
}

/// Cumulative-probability table for categorical draws by binary search.
pub struct CategoricalSampler {
    cumulative: Vec<f64>,
}

impl CategoricalSampler {
    pub fn new<S: Scalar>(pop: &Popularity<S>) -> Self {
        let mut acc = <f64 as Scalar>::accumulator();
        let mut cumulative: Vec<f64> = pop
            .probs()
            .iter()
            .map(|p| {
                acc.add(p.to_f64());
                acc.total()
            })
            .collect();
        // pin the last boundary so a draw can never fall off the end
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        Self { cumulative }
    }

    /// Draws a 1-based item index.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cumulative.partition_point(|&edge| edge <= u) + 1
    }
}

/// Trials until `c` distinct items have been seen, drawn from a fresh
/// generator; `Ok(None)` marks a sample that hit the trial cap.
pub fn sample_waiting_time<S: Scalar, R: Rng + ?Sized>(
    pop: &Popularity<S>,
    c: usize,
    rng: &mut R,
    k_cap: u64,
) -> Result<Option<u64>> {
    validate(pop.n(), c, 1, k_cap)?;
    let sampler = CategoricalSampler::new(pop);
    let mut seen = vec![false; pop.n()];
    Ok(run_one(&sampler, c, k_cap, &mut seen, rng))
}

fn run_one<R: Rng + ?Sized>(
    sampler: &CategoricalSampler,
    c: usize,
    k_cap: u64,
    seen: &mut [bool],
    rng: &mut R,
) -> Option<u64> {
    seen.fill(false);
    let mut distinct = 0usize;
    for trial in 1..=k_cap {
        let item = sampler.draw(rng) - 1;
        if !seen[item] {
            seen[item] = true;
            distinct += 1;
            if distinct == c {
                return Some(trial);
            }
        }
    }
    None
}

/// Histogram of waiting times over many samples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmpiricalDistribution {
    /// trial count -> occurrences
    pub counts: BTreeMap<u64, u64>,
    pub samples: u64,
    /// samples that hit the trial cap; excluded from moment estimates
    pub truncated: u64,
}

impl EmpiricalDistribution {
    /// Mean over completed samples; `None` when everything truncated.
    pub fn mean(&self) -> Option<f64> {
        let completed = self.samples - self.truncated;
        if completed == 0 {
            return None;
        }
        let total: f64 = self
            .counts
            .iter()
            .map(|(&k, &count)| k as f64 * count as f64)
            .sum();
        Some(total / completed as f64)
    }

    /// Standard error of the mean over completed samples.
    pub fn std_error(&self) -> Option<f64> {
        let completed = self.samples - self.truncated;
        if completed < 2 {
            return None;
        }
        let mean = self.mean()?;
        let sum_sq: f64 = self
            .counts
            .iter()
            .map(|(&k, &count)| {
                let d = k as f64 - mean;
                d * d * count as f64
            })
            .sum();
        let variance = sum_sq / (completed as f64 - 1.0);
        Some((variance / completed as f64).sqrt())
    }

    /// Empirical `Pr[T <= k]`; truncated samples count as right-tail mass.
    pub fn cdf_at(&self, k: u64) -> f64 {
        let below: u64 = self.counts.range(..=k).map(|(_, &count)| count).sum();
        below as f64 / self.samples as f64
    }

    pub fn max_observed(&self) -> Option<u64> {
        self.counts.keys().next_back().copied()
    }
}

fn validate(n: usize, c: usize, samples: u64, k_cap: u64) -> Result<()> {
    if c < 1 || c > n {
        return Err(Error::Range(format!(
            "collection size must satisfy 1 <= c <= n, got c = {c}, n = {n}"
        )));
    }
    if samples < 1 {
        return Err(Error::Range("need at least one sample".to_owned()));
    }
    if k_cap < n as u64 {
        return Err(Error::Range(format!(
            "trial cap {k_cap} below n = {n} cannot complete a full collection"
        )));
    }
    Ok(())
}

/// Runs `cfg.samples` independent collections and aggregates the waiting
/// times. Deterministic for a fixed configuration: one ChaCha20 stream
/// seeded from `cfg.seed` drives the samples in order.
pub fn empirical_distribution<S: Scalar>(
    pop: &Popularity<S>,
    c: usize,
    cfg: &SimConfig,
) -> Result<EmpiricalDistribution> {
    let n = pop.n();
    let k_cap = cfg.resolve_k_cap(n);
    validate(n, c, cfg.samples, k_cap)?;
    let sampler = CategoricalSampler::new(pop);
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut seen = vec![false; n];
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    let mut truncated = 0u64;
    for _ in 0..cfg.samples {
        match run_one(&sampler, c, k_cap, &mut seen, &mut rng) {
            Some(trials) => *counts.entry(trials).or_insert(0) += 1,
            None => truncated += 1,
        }
    }
    Ok(EmpiricalDistribution {
        counts,
        samples: cfg.samples,
        truncated,
    })
}
