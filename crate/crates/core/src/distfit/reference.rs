//! Light-tailed reference families: exponential (discrete geometric) and Poisson.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use statrs::function::gamma::gamma_ur;

use super::{
    bootstrap_p_value, ks_discrete, require, Family, FitConfig, FitResult, Interval, Params, Tally,
};
use crate::error::{Error, Result};

/// Fits an exponential or Poisson law by maximum likelihood.
///
/// The exponential is the discrete geometric law on `x >= x_min`, with
/// `x_min` the sample minimum and `P(X = x) ∝ e^{-rate (x - x_min)}`.
pub fn fit_reference(data: &[u64], family: Family, cfg: &FitConfig) -> Result<FitResult> {
    let mut sorted = data.to_vec();
    require(sorted.len())?;
    sorted.sort_unstable();
    if sorted[0] == sorted[sorted.len() - 1] {
        return Err(Error::FitDegenerate("all observations are equal".into()));
    }
    let n = sorted.len();
    let tally = Tally::from_sorted(&sorted);

    let (params, ks, p_value) = match family {
        Family::Exponential => {
            let (x_min, rate) = geometric_mle(&tally);
            let ks = ks_with(&tally, |x| geometric_cdf(x_min, rate, x));
            let p = bootstrap_p_value(ks, cfg, |rng| {
                let mut synth: Vec<u64> =
                    (0..n).map(|_| geometric_sample(x_min, rate, rng)).collect();
                synth.sort_unstable();
                let t = Tally::from_sorted(&synth);
                if t.values.len() < 2 {
                    return None;
                }
                let (m, r) = geometric_mle(&t);
                Some(ks_with(&t, |x| geometric_cdf(m, r, x)))
            });
            let params = Params {
                x_min: Some(x_min),
                rate: Some(rate),
                ..Params::default()
            };
            (params, ks, p)
        }
        Family::Poisson => {
            let mean = sample_mean(&tally);
            let ks = ks_with(&tally, |x| poisson_cdf_at(mean, x));
            let law = Poisson::new(mean).map_err(|e| Error::FitDegenerate(e.to_string()))?;
            let p = bootstrap_p_value(ks, cfg, |rng| {
                let mut synth: Vec<u64> = (0..n).map(|_| law.sample(rng) as u64).collect();
                synth.sort_unstable();
                let t = Tally::from_sorted(&synth);
                let m = sample_mean(&t);
                (m > 0.0).then(|| ks_with(&t, |x| poisson_cdf_at(m, x)))
            });
            let params = Params {
                mean: Some(mean),
                ..Params::default()
            };
            (params, ks, p)
        }
        other => {
            return Err(Error::Argument(format!(
                "{other:?} is not a reference family"
            )))
        }
    };

    Ok(FitResult {
        family,
        params,
        interval: Interval::new(sorted[0], sorted[n - 1]),
        ks_statistic: ks,
        p_value,
        sample_size: n,
        total_size: n,
        bootstrap: cfg.bootstrap,
    })
}

pub(crate) fn exponential_cdf(params: &Params, x: u64) -> f64 {
    geometric_cdf(params.x_min.unwrap(), params.rate.unwrap(), x)
}

pub(crate) fn poisson_cdf(params: &Params, x: u64) -> f64 {
    poisson_cdf_at(params.mean.unwrap(), x)
}

fn ks_with<F: Fn(u64) -> f64>(t: &Tally, cdf: F) -> f64 {
    ks_discrete(
        &t.values,
        &t.counts,
        |v| (if v == 0 { 0.0 } else { cdf(v - 1) }, cdf(v)),
        f64::INFINITY,
    )
}

fn sample_mean(t: &Tally) -> f64 {
    let s: f64 = t
        .values
        .iter()
        .zip(&t.counts)
        .map(|(&v, &c)| v as f64 * c as f64)
        .sum();
    s / t.n as f64
}

fn geometric_mle(t: &Tally) -> (u64, f64) {
    let x_min = t.values[0];
    let excess = sample_mean(t) - x_min as f64;
    (x_min, (1.0 + 1.0 / excess).ln())
}

fn geometric_cdf(x_min: u64, rate: f64, x: u64) -> f64 {
    if x < x_min {
        return 0.0;
    }
    -(-rate * (x - x_min + 1) as f64).exp_m1()
}

fn geometric_sample(x_min: u64, rate: f64, rng: &mut ChaCha8Rng) -> u64 {
    // number of failures before the first success, success probability 1 - e^{-rate}
    let u: f64 = rng.random();
    let k = ((1.0 - u).ln() / -rate).floor();
    x_min + k.min(u64::MAX as f64 / 2.0) as u64
}

fn poisson_cdf_at(mean: f64, x: u64) -> f64 {
    // P(X <= x) = Q(x + 1, mean), the regularized upper incomplete gamma
    gamma_ur(x as f64 + 1.0, mean)
}
