//! Degree-distribution fitting with Kolmogorov–Smirnov goodness of fit.
//!
//! Every family is fitted to integer data by maximum likelihood, then scored
//! with the KS distance between the empirical CDF and the fitted discrete CDF.
//! p-values come from a seeded bootstrap that reruns the whole fitting
//! procedure on synthetic samples drawn from the fitted model, so estimated
//! parameters are accounted for. Each replicate owns its own ChaCha stream,
//! which keeps results identical however the replicates are scheduled.

mod lognormal;
mod powerlaw;
mod reference;
pub mod zeta;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use lognormal::fit_lognormal;
pub use powerlaw::fit_powerlaw;
pub use reference::fit_reference;

/// Smallest sample any family is fitted on.
pub const MIN_OBSERVATIONS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Powerlaw,
    Lognormal,
    Exponential,
    Poisson,
}

/// Fitted parameters; only the family's own fields are set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub x_min: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mean: Option<f64>,
}

/// Inclusive integer range of the data a model is fitted to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: u64,
    pub hi: u64,
}

impl Interval {
    pub fn new(lo: u64, hi: u64) -> Self {
        Interval { lo, hi }
    }

    /// `[min, max]` of the data.
    pub fn covering(data: &[u64]) -> Option<Self> {
        let lo = *data.iter().min()?;
        let hi = *data.iter().max()?;
        Some(Interval { lo, hi })
    }

    pub fn contains(&self, x: u64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub family: Family,
    #[serde(flatten)]
    pub params: Params,
    pub interval: Interval,
    pub ks_statistic: f64,
    pub p_value: f64,
    /// Observations the model was fitted to (the tail, for power laws).
    pub sample_size: usize,
    /// Observations supplied, before truncation.
    pub total_size: usize,
    pub bootstrap: usize,
}

impl FitResult {
    /// `P(X >= x)` under the fitted model.
    pub fn model_ccdf(&self, x: u64) -> f64 {
        if x == 0 {
            return 1.0;
        }
        1.0 - self.model_cdf(x - 1)
    }

    /// `P(X <= x)` under the fitted model. Truncated families are conditioned
    /// on their interval.
    pub fn model_cdf(&self, x: u64) -> f64 {
        match self.family {
            Family::Powerlaw => powerlaw::cdf(&self.params, x),
            Family::Lognormal => lognormal::cdf(&self.params, self.interval, x),
            Family::Exponential => reference::exponential_cdf(&self.params, x),
            Family::Poisson => reference::poisson_cdf(&self.params, x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Bootstrap replicates for the p-value.
    pub bootstrap: usize,
    pub seed: u64,
    /// Smallest tail a power-law `x_min` candidate may leave, in observations.
    pub min_tail: usize,
    /// Smallest tail as a fraction of the sample; the larger bound applies.
    /// Very short tails cannot tell a power law from a fast-decaying law, so
    /// without this floor the scan drifts into them and loses all power.
    pub min_tail_fraction: f64,
}

impl FitConfig {
    pub(crate) fn tail_floor(&self, n: usize) -> usize {
        let frac = (self.min_tail_fraction * n as f64).ceil() as usize;
        self.min_tail.max(frac).max(2)
    }
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            bootstrap: 1_000,
            seed: 0,
            min_tail: MIN_OBSERVATIONS,
            min_tail_fraction: 0.05,
        }
    }
}

/// Empirical CCDF: `(x, P(X >= x))` for each distinct value, ascending.
pub fn ccdf(data: &[u64]) -> Vec<(u64, f64)> {
    let mut sorted = data.to_vec();
    sorted.sort_unstable();
    let n = sorted.len() as f64;
    let mut out = Vec::new();
    for (i, &x) in sorted.iter().enumerate() {
        if i == 0 || sorted[i - 1] != x {
            out.push((x, (sorted.len() - i) as f64 / n));
        }
    }
    out
}

/// Sorted data compressed into `(value, count)` runs.
#[derive(Debug, Clone)]
pub(crate) struct Tally {
    pub values: Vec<u64>,
    pub counts: Vec<u64>,
    pub n: u64,
}

impl Tally {
    pub fn from_sorted(sorted: &[u64]) -> Self {
        let mut values = Vec::new();
        let mut counts = Vec::new();
        for &x in sorted {
            if values.last() == Some(&x) {
                *counts.last_mut().unwrap() += 1;
            } else {
                values.push(x);
                counts.push(1);
            }
        }
        Tally {
            values,
            counts,
            n: sorted.len() as u64,
        }
    }

    pub fn from_unsorted(data: &[u64]) -> Self {
        let mut v = data.to_vec();
        v.sort_unstable();
        Self::from_sorted(&v)
    }
}

/// KS distance between the empirical distribution of `values/counts` and a
/// discrete model.
///
/// `model` is called once per distinct value, in ascending order, and returns
/// `(F(v - 1), F(v))`. The scan stops early once the distance exceeds `bound`;
/// the returned value is then some number larger than `bound`.
pub(crate) fn ks_discrete<F>(values: &[u64], counts: &[u64], mut model: F, bound: f64) -> f64
where
    F: FnMut(u64) -> (f64, f64),
{
    let n: u64 = counts.iter().sum();
    let inv = 1.0 / n as f64;
    let mut cum = 0u64;
    let mut d = 0.0f64;
    for (&v, &c) in values.iter().zip(counts) {
        let (below, at) = model(v);
        let before = cum as f64 * inv;
        cum += c;
        let after = cum as f64 * inv;
        d = d.max((before - below).abs()).max((after - at).abs());
        if d > bound {
            return d;
        }
    }
    d
}

/// KS distance of `data` against a finished fit, recomputed from scratch.
pub fn ks_statistic(data: &[u64], fit: &FitResult) -> f64 {
    let inside: Vec<u64> = data
        .iter()
        .copied()
        .filter(|&x| fit.interval.contains(x))
        .collect();
    let t = Tally::from_unsorted(&inside);
    ks_discrete(
        &t.values,
        &t.counts,
        |v| {
            let below = if v == 0 { 0.0 } else { fit.model_cdf(v - 1) };
            (below, fit.model_cdf(v))
        },
        f64::INFINITY,
    )
}

/// Fraction of bootstrap statistics at least as large as `observed`.
///
/// `replicate` receives a generator seeded for replicate `r` and returns that
/// replicate's KS distance, or `None` when the synthetic sample could not be
/// fitted (counted as not exceeding).
pub(crate) fn bootstrap_p_value<F>(observed: f64, cfg: &FitConfig, replicate: F) -> f64
where
    F: Fn(&mut ChaCha8Rng) -> Option<f64> + Sync,
{
    if cfg.bootstrap == 0 {
        return f64::NAN;
    }
    let exceed: usize = (0..cfg.bootstrap)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(r as u64 + 1);
            match replicate(&mut rng) {
                Some(d) if d >= observed => 1,
                _ => 0,
            }
        })
        .sum();
    exceed as f64 / cfg.bootstrap as f64
}

fn require(n: usize) -> Result<()> {
    match n {
        0 => Err(Error::EmptySample),
        n if n < MIN_OBSERVATIONS => Err(Error::InsufficientData {
            needed: MIN_OBSERVATIONS,
            got: n,
        }),
        _ => Ok(()),
    }
}
