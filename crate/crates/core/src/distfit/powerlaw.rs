//! Discrete power law `P(X = x) = x^{-α} / ζ(α, x_min)` for `x >= x_min`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::zeta::{hurwitz_zeta, zeta_and_derivative};
use super::{
    bootstrap_p_value, ks_discrete, require, Family, FitConfig, FitResult, Interval, Params, Tally,
};
use crate::error::{Error, Result};

/// Beyond this gap between consecutive data values the tail sum is
/// re-evaluated with the zeta function instead of summed term by term.
const MAX_STEPWISE_GAP: u64 = 48;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct TailFit {
    pub x_min: u64,
    pub alpha: f64,
    pub ks: f64,
    pub n_tail: u64,
}

/// Fits a discrete power law, choosing `x_min` among the observed values to
/// minimize the KS distance of the tail. Zeros are ignored.
pub fn fit_powerlaw(data: &[u64], cfg: &FitConfig) -> Result<FitResult> {
    let mut sorted: Vec<u64> = data.iter().copied().filter(|&x| x >= 1).collect();
    require(sorted.len())?;
    sorted.sort_unstable();
    if sorted[0] == sorted[sorted.len() - 1] {
        return Err(Error::FitDegenerate("all observations are equal".into()));
    }
    let floor = cfg.tail_floor(sorted.len());
    let best = scan(&sorted, floor)
        .ok_or_else(|| Error::FitDegenerate("no x_min candidate leaves a usable tail".into()))?;

    let n = sorted.len();
    let split = sorted.partition_point(|&x| x < best.x_min);
    let below = &sorted[..split];
    let tail_prob = best.n_tail as f64 / n as f64;
    let sampler = Sampler::new(best.alpha, best.x_min);
    let p_value = bootstrap_p_value(best.ks, cfg, |rng| {
        let mut synth: Vec<u64> = (0..n)
            .map(|_| {
                if below.is_empty() || rng.random::<f64>() < tail_prob {
                    sampler.sample(rng)
                } else {
                    below[rng.random_range(0..below.len())]
                }
            })
            .collect();
        synth.sort_unstable();
        scan(&synth, floor).map(|f| f.ks)
    });

    Ok(FitResult {
        family: Family::Powerlaw,
        params: Params {
            x_min: Some(best.x_min),
            alpha: Some(best.alpha),
            ..Params::default()
        },
        interval: Interval::new(best.x_min, sorted[n - 1]),
        ks_statistic: best.ks,
        p_value,
        sample_size: best.n_tail as usize,
        total_size: n,
        bootstrap: cfg.bootstrap,
    })
}

/// `x_min` scan over sorted positive data, keeping candidates whose tail
/// holds at least `min_tail` observations. Returns the candidate with the
/// smallest KS distance (lowest `x_min` on ties).
pub(crate) fn scan(sorted: &[u64], min_tail: usize) -> Option<TailFit> {
    let t = Tally::from_sorted(sorted);
    let d = t.values.len();
    // suffix sums of counts and of count * ln(value)
    let mut suf_n = vec![0u64; d + 1];
    let mut suf_log = vec![0.0f64; d + 1];
    for i in (0..d).rev() {
        suf_n[i] = suf_n[i + 1] + t.counts[i];
        suf_log[i] = suf_log[i + 1] + t.counts[i] as f64 * (t.values[i] as f64).ln();
    }

    let mut best: Option<TailFit> = None;
    for i in 0..d.saturating_sub(1) {
        let n_tail = suf_n[i];
        if (n_tail as usize) < min_tail {
            break;
        }
        let x_min = t.values[i];
        let Some(alpha) = mle_alpha(x_min, n_tail, suf_log[i]) else {
            continue;
        };
        let bound = best.map_or(f64::INFINITY, |b| b.ks);
        let ks = tail_ks(&t.values[i..], &t.counts[i..], alpha, x_min, bound);
        if ks < bound {
            best = Some(TailFit {
                x_min,
                alpha,
                ks,
                n_tail,
            });
        }
    }
    best
}

/// Solves `E_α[ln X] = mean(ln x)` for the tail starting at `x_min`.
///
/// The left side is `-ζ'(α, x_min)/ζ(α, x_min)`, strictly decreasing in α,
/// so the root is bracketed and refined with the Illinois method.
pub(crate) fn mle_alpha(x_min: u64, n: u64, sum_log: f64) -> Option<f64> {
    let q = x_min as f64;
    let target = sum_log / n as f64;
    if target <= q.ln() + 1e-12 {
        return None;
    }
    let score = |a: f64| {
        let (z, dz) = zeta_and_derivative(a, q);
        -dz / z - target
    };

    // continuous approximation as a starting point
    let guess = 1.0 + 1.0 / (target - (q - 0.5).ln()).max(1e-9);
    let floor = 1.0 + 1e-9;
    let mut lo = (guess - 0.25).max(floor);
    let mut hi = guess + 0.25;
    let mut f_lo = score(lo);
    while f_lo < 0.0 {
        if lo <= floor {
            return None;
        }
        hi = lo;
        lo = (1.0 + (lo - 1.0) / 4.0).max(floor);
        f_lo = score(lo);
    }
    let mut f_hi = score(hi);
    while f_hi > 0.0 {
        lo = hi;
        f_lo = f_hi;
        hi = 1.0 + 2.0 * (hi - 1.0);
        if hi > 200.0 {
            return None;
        }
        f_hi = score(hi);
    }

    let mut side = 0i8;
    for _ in 0..200 {
        let x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        let fx = score(x);
        if fx == 0.0 || (hi - lo) < 1e-12 * x {
            return Some(x);
        }
        if fx > 0.0 {
            lo = x;
            f_lo = fx;
            if side == 1 {
                f_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = x;
            f_hi = fx;
            if side == -1 {
                f_lo *= 0.5;
            }
            side = -1;
        }
    }
    Some(0.5 * (lo + hi))
}

/// KS distance of a tail against the power law, with early exit above `bound`.
fn tail_ks(values: &[u64], counts: &[u64], alpha: f64, x_min: u64, bound: f64) -> f64 {
    let norm = hurwitz_zeta(alpha, x_min as f64);
    // invariant: `rest` = ζ(α, next), the unnormalized mass at or above `next`
    let mut next = x_min;
    let mut rest = norm;
    ks_discrete(
        values,
        counts,
        |v| {
            if v - next > MAX_STEPWISE_GAP {
                rest = hurwitz_zeta(alpha, v as f64);
            } else {
                for x in next..v {
                    rest -= (x as f64).powf(-alpha);
                }
            }
            let below = 1.0 - rest / norm;
            rest -= (v as f64).powf(-alpha);
            next = v + 1;
            (below, 1.0 - rest / norm)
        },
        bound,
    )
}

pub(crate) fn cdf(params: &Params, x: u64) -> f64 {
    let (alpha, x_min) = (params.alpha.unwrap(), params.x_min.unwrap());
    if x < x_min {
        return 0.0;
    }
    1.0 - hurwitz_zeta(alpha, (x + 1) as f64) / hurwitz_zeta(alpha, x_min as f64)
}

/// Exact inverse-CDF sampling from a tabulated CDF, with the continuous
/// approximation only for the far tail beyond the table.
pub(crate) struct Sampler {
    alpha: f64,
    x_min: u64,
    table: Vec<f64>,
}

impl Sampler {
    const MAX_TABLE: usize = 1 << 20;

    pub fn new(alpha: f64, x_min: u64) -> Self {
        let norm = hurwitz_zeta(alpha, x_min as f64);
        let mut table = Vec::new();
        let mut cum = 0.0;
        let mut x = x_min;
        while table.len() < Self::MAX_TABLE {
            cum += (x as f64).powf(-alpha) / norm;
            table.push(cum);
            if 1.0 - cum < 1e-12 {
                break;
            }
            x += 1;
        }
        Sampler {
            alpha,
            x_min,
            table,
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> u64 {
        let u: f64 = rng.random();
        let last = *self.table.last().unwrap();
        if u <= last {
            return self.x_min + self.table.partition_point(|&c| c < u) as u64;
        }
        let start = (self.x_min + self.table.len() as u64) as f64;
        let r: f64 = rng.random();
        let x = ((start - 0.5) * (1.0 - r).powf(-1.0 / (self.alpha - 1.0)) + 0.5).floor();
        x.min(u64::MAX as f64 / 2.0) as u64
    }
}
