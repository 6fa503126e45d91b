//! Statistical properties of the heat-bath chain at moderate and large `n`.

use rcm_core::sampler::{
    compare_initialisations, estimate_theta, run_chain, ChainConfig, Estimate,
};
use rcm_core::{rate, ModelParams};

fn config(n: usize, lambda: f64, q: f64, seed: u64, burn: usize, samples: usize) -> ChainConfig {
    let mut cfg = ChainConfig::new(ModelParams::new(n, lambda, q).unwrap(), seed);
    cfg.burn_in_sweeps = burn;
    cfg.sample_sweeps = samples;
    cfg
}

/// `a` is below `b` by more than two combined standard errors.
fn separated(a: &Estimate, b: &Estimate) -> bool {
    b.mean - a.mean > 2.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt()
}

#[test]
fn largest_fraction_increases_with_lambda() {
    let ests: Vec<Estimate> = [1.0, 2.0, 3.0, 4.0]
        .iter()
        .map(|&l| estimate_theta(&config(1000, l, 2.0, 31, 50, 200)).unwrap())
        .collect();
    for w in ests.windows(2) {
        assert!(separated(&w[0], &w[1]), "{:?} then {:?}", w[0], w[1]);
    }
}

#[test]
fn rcm_lies_between_percolation_bounds() {
    let rc = estimate_theta(&config(1000, 3.0, 2.0, 32, 50, 200)).unwrap();
    let lo = estimate_theta(&config(1000, 1.5, 1.0, 33, 50, 200)).unwrap();
    let hi = estimate_theta(&config(1000, 3.0, 1.0, 34, 50, 200)).unwrap();
    assert!(separated(&lo, &rc), "{lo:?} vs {rc:?}");
    assert!(separated(&rc, &hi), "{rc:?} vs {hi:?}");
}

#[test]
fn few_cycles_outside_the_giant() {
    let recs = run_chain(&config(2000, 3.0, 2.0, 35, 60, 100)).unwrap();
    let mean = recs.iter().map(|r| r.cyclic_outside_fraction).sum::<f64>() / recs.len() as f64;
    assert!(mean < 0.01, "mean cyclic fraction outside giant {mean}");
}

#[test]
fn empty_and_full_starts_agree_away_from_criticality() {
    let (empty, full) = compare_initialisations(&config(500, 3.0, 2.0, 36, 100, 200)).unwrap();
    let gap = (empty.mean - full.mean).abs();
    assert!(gap < 4.0 * (empty.stderr.powi(2) + full.stderr.powi(2)).sqrt() + 0.01);
    assert!((full.mean - rate::theta_max(3.0, 2.0).unwrap()).abs() < 0.03);
}

#[test]
fn record_stream_is_reproducible() {
    let mut cfg = config(300, 2.5, 1.5, 37, 3, 12);
    cfg.eps = vec![0.05];
    assert_eq!(run_chain(&cfg).unwrap(), run_chain(&cfg).unwrap());
}

#[test]
fn experimental_flag_below_q_one() {
    assert!(config(50, 1.0, 0.5, 1, 1, 1).is_experimental());
    assert!(!config(50, 1.0, 1.0, 1, 1, 1).is_experimental());
}
