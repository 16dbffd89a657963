//! Lognormal fitted on an integer interval.
//!
//! The model is a normal law on `ln x`, truncated to the interval and
//! discretized by rounding: integer `x` carries the mass of
//! `[ln(x - 0.5), ln(x + 0.5))`.

use std::f64::consts::SQRT_2;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::{erfc, erfc_inv};

use super::{
    bootstrap_p_value, ks_discrete, require, Family, FitConfig, FitResult, Interval, Params, Tally,
};
use crate::error::{Error, Result};

/// Fits a lognormal to the observations inside `interval`.
///
/// `μ` and `σ` maximize the likelihood of the log-values under a normal law
/// truncated to the interval, so cutting away low degrees or outliers does
/// not bias the estimates toward the retained window.
pub fn fit_lognormal(data: &[u64], interval: Interval, cfg: &FitConfig) -> Result<FitResult> {
    if interval.lo > interval.hi {
        return Err(Error::Argument(format!(
            "interval [{}, {}] is empty",
            interval.lo, interval.hi
        )));
    }
    let interval = Interval::new(interval.lo.max(1), interval.hi);
    let mut inside: Vec<u64> = data
        .iter()
        .copied()
        .filter(|&x| interval.contains(x))
        .collect();
    require(inside.len())?;
    inside.sort_unstable();
    if inside[0] == inside[inside.len() - 1] {
        return Err(Error::FitDegenerate(
            "all observations in the interval are equal".into(),
        ));
    }

    let tally = Tally::from_sorted(&inside);
    let model = Truncated::fit(&tally, interval)
        .ok_or_else(|| Error::FitDegenerate("lognormal likelihood did not converge".into()))?;
    let ks = model.ks(&tally, f64::INFINITY);

    let n = inside.len();
    let p_value = bootstrap_p_value(ks, cfg, |rng| {
        let mut synth: Vec<u64> = (0..n).map(|_| model.sample(rng)).collect();
        synth.sort_unstable();
        let t = Tally::from_sorted(&synth);
        if t.values.len() < 2 {
            return None;
        }
        Truncated::fit(&t, interval).map(|m| m.ks(&t, f64::INFINITY))
    });

    Ok(FitResult {
        family: Family::Lognormal,
        params: Params {
            mu: Some(model.mu),
            sigma: Some(model.sigma),
            ..Params::default()
        },
        interval,
        ks_statistic: ks,
        p_value,
        sample_size: n,
        total_size: data.len(),
        bootstrap: cfg.bootstrap,
    })
}

pub(crate) fn cdf(params: &Params, interval: Interval, x: u64) -> f64 {
    Truncated::new(params.mu.unwrap(), params.sigma.unwrap(), interval).cdf(x)
}

/// `P(Z > z)` for a standard normal.
fn upper(z: f64) -> f64 {
    0.5 * erfc(z / SQRT_2)
}

/// `P(Z <= z)` for a standard normal.
fn lower(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// Mass of a standard normal on `[a, b]`, from whichever tail is accurate.
fn mass(a: f64, b: f64) -> f64 {
    if a > 0.0 {
        upper(a) - upper(b)
    } else {
        lower(b) - lower(a)
    }
}

#[derive(Debug, Clone, Copy)]
struct Truncated {
    mu: f64,
    sigma: f64,
    /// Standardized log-bounds of the interval.
    a: f64,
    b: f64,
    lo: u64,
    hi: u64,
}

impl Truncated {
    fn new(mu: f64, sigma: f64, interval: Interval) -> Self {
        let (lo_edge, hi_edge) = log_edges(interval);
        Truncated {
            mu,
            sigma,
            a: (lo_edge - mu) / sigma,
            b: (hi_edge - mu) / sigma,
            lo: interval.lo,
            hi: interval.hi,
        }
    }

    /// Maximum-likelihood fit of the truncated normal to `ln x`.
    fn fit(t: &Tally, interval: Interval) -> Option<Self> {
        let n = t.n as f64;
        let (mut sy, mut syy) = (0.0, 0.0);
        for (&v, &c) in t.values.iter().zip(&t.counts) {
            let y = (v as f64).ln();
            sy += c as f64 * y;
            syy += c as f64 * y * y;
        }
        let mean = sy / n;
        let var = (syy / n - mean * mean).max(1e-12);
        let (lo_edge, hi_edge) = log_edges(interval);

        let neg_ll = |p: [f64; 2]| {
            let (mu, sigma) = (p[0], p[1].exp());
            let z = mass((lo_edge - mu) / sigma, (hi_edge - mu) / sigma);
            if !(z > 0.0) {
                return f64::INFINITY;
            }
            let ss = syy - 2.0 * mu * sy + n * mu * mu;
            n * sigma.ln() + ss / (2.0 * sigma * sigma) + n * z.ln()
        };
        let [mu, log_sigma] = nelder_mead(neg_ll, [mean, 0.5 * var.ln()], 0.1)?;
        let sigma = log_sigma.exp();
        (mu.is_finite() && sigma.is_finite() && sigma > 0.0).then(|| Self::new(mu, sigma, interval))
    }

    fn z(&self, x: f64) -> f64 {
        (x.ln() - self.mu) / self.sigma
    }

    fn cdf(&self, x: u64) -> f64 {
        if x < self.lo {
            return 0.0;
        }
        if x >= self.hi {
            return 1.0;
        }
        let zx = self.z(x as f64 + 0.5);
        (mass(self.a, zx) / mass(self.a, self.b)).clamp(0.0, 1.0)
    }

    fn ks(&self, t: &Tally, bound: f64) -> f64 {
        ks_discrete(
            &t.values,
            &t.counts,
            |v| (if v == 0 { 0.0 } else { self.cdf(v - 1) }, self.cdf(v)),
            bound,
        )
    }

    /// Inverse-CDF draw, worked on the survival scale in the upper tail.
    fn sample(&self, rng: &mut ChaCha8Rng) -> u64 {
        let u: f64 = rng.random();
        let z = if self.a > 0.0 {
            let (sa, sb) = (upper(self.a), upper(self.b));
            let s = sb + u * (sa - sb);
            SQRT_2 * erfc_inv(2.0 * s)
        } else {
            let (la, lb) = (lower(self.a), lower(self.b));
            let p = la + u * (lb - la);
            -SQRT_2 * erfc_inv(2.0 * p)
        };
        let x = (self.mu + self.sigma * z).exp().round();
        if x.is_finite() {
            (x as u64).clamp(self.lo, self.hi)
        } else {
            self.hi
        }
    }
}

fn log_edges(interval: Interval) -> (f64, f64) {
    (
        (interval.lo as f64 - 0.5).ln(),
        (interval.hi as f64 + 0.5).ln(),
    )
}

/// Two-dimensional Nelder–Mead minimization.
fn nelder_mead<F: Fn([f64; 2]) -> f64>(f: F, start: [f64; 2], step: f64) -> Option<[f64; 2]> {
    let mut pts = [
        start,
        [start[0] + step, start[1]],
        [start[0], start[1] + step],
    ];
    let mut vals = pts.map(&f);
    for _ in 0..5_000 {
        let mut order = [0, 1, 2];
        order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        pts = order.map(|i| pts[i]);
        vals = order.map(|i| vals[i]);

        let spread = (vals[2] - vals[0]).abs();
        let size = (0..2)
            .map(|k| {
                (pts[2][k] - pts[0][k])
                    .abs()
                    .max((pts[1][k] - pts[0][k]).abs())
            })
            .fold(0.0, f64::max);
        if spread <= 1e-12 * (1.0 + vals[0].abs()) && size < 1e-9 {
            return Some(pts[0]);
        }

        let c = [(pts[0][0] + pts[1][0]) / 2.0, (pts[0][1] + pts[1][1]) / 2.0];
        let along = |t: f64| [c[0] + t * (pts[2][0] - c[0]), c[1] + t * (pts[2][1] - c[1])];
        let r = along(-1.0);
        let fr = f(r);
        if fr < vals[0] {
            let e = along(-2.0);
            let fe = f(e);
            (pts[2], vals[2]) = if fe < fr { (e, fe) } else { (r, fr) };
        } else if fr < vals[1] {
            (pts[2], vals[2]) = (r, fr);
        } else {
            let k = if fr < vals[2] {
                along(-0.5)
            } else {
                along(0.5)
            };
            let fk = f(k);
            if fk < vals[2].min(fr) {
                (pts[2], vals[2]) = (k, fk);
            } else {
                for i in 1..3 {
                    pts[i] = [(pts[0][0] + pts[i][0]) / 2.0, (pts[0][1] + pts[i][1]) / 2.0];
                    vals[i] = f(pts[i]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&i, &j| vals[i].total_cmp(&vals[j]))?;
    vals[best].is_finite().then_some(pts[best])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let p = nelder_mead(
            |[x, y]| (x - 3.0).powi(2) + 2.0 * (y + 1.0).powi(2),
            [0.0, 0.0],
            0.5,
        )
        .unwrap();
        assert!(
            (p[0] - 3.0).abs() < 1e-6 && (p[1] + 1.0).abs() < 1e-6,
            "{p:?}"
        );
    }

    #[test]
    fn cdf_is_monotone_and_bounded() {
        let m = Truncated::new(4.0, 1.2, Interval::new(20, 900));
        assert_eq!(m.cdf(19), 0.0);
        assert_eq!(m.cdf(900), 1.0);
        let mut prev = 0.0;
        for x in 20..900 {
            let c = m.cdf(x);
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn untruncated_fit_matches_log_moments() {
        // a wide interval makes truncation negligible, leaving the plain MLE
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = Truncated::new(6.0, 0.5, Interval::new(1, 1_000_000));
        let mut xs: Vec<u64> = (0..5_000).map(|_| m.sample(&mut rng)).collect();
        xs.sort_unstable();
        let t = Tally::from_sorted(&xs);
        let fit = Truncated::fit(&t, Interval::new(1, 1_000_000)).unwrap();
        let ys: Vec<f64> = xs.iter().map(|&x| (x as f64).ln()).collect();
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        let sd = (ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / ys.len() as f64).sqrt();
        assert!((fit.mu - mean).abs() < 1e-6, "{} vs {mean}", fit.mu);
        assert!((fit.sigma - sd).abs() < 1e-6, "{} vs {sd}", fit.sigma);
    }

    #[test]
    fn singleton_interval_is_rejected() {
        let data: Vec<u64> = (1..=200).collect();
        let cfg = FitConfig::default();
        assert!(fit_lognormal(&data, Interval::new(7, 7), &cfg).is_err());
        assert!(matches!(
            fit_lognormal(&data, Interval::new(500, 900), &cfg),
            Err(Error::EmptySample)
        ));
    }
}
