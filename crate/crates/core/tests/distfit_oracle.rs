use instnet::distfit::{
    ccdf, fit_lognormal, fit_powerlaw, fit_reference, ks_statistic, Family, FitConfig, FitResult,
    Interval,
};
use instnet_testkit::gen::{
    geometric_sample, lognormal_sample, poisson_sample, powerlaw_sample, stream,
};
use instnet_testkit::oracle;

fn quick(seed: u64) -> FitConfig {
    FitConfig {
        bootstrap: 50,
        seed,
        ..FitConfig::default()
    }
}

fn naive_ks(data: &[u64], fit: &FitResult) -> f64 {
    oracle::ks_naive(data, fit.interval.lo, fit.interval.hi, |x| fit.model_cdf(x)).unwrap()
}

#[test]
fn ks_matches_full_scan_for_every_family() {
    for seed in 0..5u64 {
        let mut rng = stream(seed, 0);
        let pl = powerlaw_sample(3_000, 2.3, 2, &mut rng).unwrap();
        let ln = lognormal_sample(3_000, 2.0, 0.8, &mut rng).unwrap();
        let geo = geometric_sample(3_000, 0.2, &mut rng).unwrap();
        let poi = poisson_sample(3_000, 12.0, &mut rng).unwrap();
        let fits = [
            (pl.clone(), fit_powerlaw(&pl, &quick(seed)).unwrap()),
            (
                ln.clone(),
                fit_lognormal(&ln, Interval::covering(&ln).unwrap(), &quick(seed)).unwrap(),
            ),
            (
                ln.clone(),
                fit_lognormal(&ln, Interval::new(5, 40), &quick(seed)).unwrap(),
            ),
            (
                geo.clone(),
                fit_reference(&geo, Family::Exponential, &quick(seed)).unwrap(),
            ),
            (
                poi.clone(),
                fit_reference(&poi, Family::Poisson, &quick(seed)).unwrap(),
            ),
        ];
        for (data, fit) in &fits {
            let naive = naive_ks(data, fit);
            assert!(
                (fit.ks_statistic - naive).abs() <= 1e-12,
                "{:?}: {} vs {naive}",
                fit.family,
                fit.ks_statistic
            );
            assert!((ks_statistic(data, fit) - naive).abs() <= 1e-12);
        }
    }
}

#[test]
fn powerlaw_scan_matches_exhaustive_search() {
    for seed in 0..4u64 {
        let data = powerlaw_sample(2_000, 2.5, 1 + seed, &mut stream(seed, 7)).unwrap();
        let cfg = quick(seed);
        let fit = fit_powerlaw(&data, &cfg).unwrap();
        let floor = cfg
            .min_tail
            .max((cfg.min_tail_fraction * data.len() as f64).ceil() as usize);
        let (x_min, alpha, ks) = oracle::powerlaw_scan(&data, floor).unwrap();
        assert!(
            (fit.ks_statistic - ks).abs() < 1e-6,
            "seed {seed}: {} vs {ks}",
            fit.ks_statistic
        );
        if fit.params.x_min == Some(x_min) {
            assert!((fit.params.alpha.unwrap() - alpha).abs() < 1e-5);
        }
    }
}

#[test]
fn powerlaw_recovers_exponent() {
    let data = powerlaw_sample(10_000, 2.5, 1, &mut stream(42, 0)).unwrap();
    let fit = fit_powerlaw(&data, &quick(0)).unwrap();
    assert!(
        (fit.params.alpha.unwrap() - 2.5).abs() <= 0.1,
        "{:?}",
        fit.params
    );
}

#[test]
fn heavy_tail_rejects_exponential() {
    let data = powerlaw_sample(5_000, 2.2, 1, &mut stream(3, 0)).unwrap();
    let fit = fit_reference(&data, Family::Exponential, &quick(1)).unwrap();
    assert!(fit.p_value < 0.1);
}

#[test]
fn bootstrap_is_reproducible() {
    let data = lognormal_sample(2_000, 1.5, 0.7, &mut stream(9, 0)).unwrap();
    let cfg = quick(77);
    let a = fit_lognormal(&data, Interval::covering(&data).unwrap(), &cfg).unwrap();
    let b = fit_lognormal(&data, Interval::covering(&data).unwrap(), &cfg).unwrap();
    assert_eq!(a, b);
    let se = (a.p_value * (1.0 - a.p_value) / cfg.bootstrap as f64).sqrt();
    assert!(se <= 0.5 / (cfg.bootstrap as f64).sqrt());
}

#[test]
fn empty_sample_is_an_error() {
    assert!(fit_powerlaw(&[], &quick(0)).is_err());
    assert!(fit_reference(&[], Family::Poisson, &quick(0)).is_err());
}

#[test]
fn ccdf_starts_at_one_and_decreases() {
    let data = geometric_sample(500, 0.3, &mut stream(1, 0)).unwrap();
    let c = ccdf(&data);
    assert_eq!(c[0].1, 1.0);
    assert!(c.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 > w[1].1));
}
