//! Cross-module properties of the exact oracle.

use proptest::prelude::*;
use rcm_core::exact::{enumerate, enumerate_chunked, ExactOptions};
use rcm_core::graph::edge_pairs;
use rcm_core::{rate, tree, ModelParams};

fn params(n: usize, lambda: f64, q: f64) -> ModelParams {
    ModelParams::new(n, lambda, q).unwrap()
}

#[test]
fn percolation_partition_function_is_one() {
    for n in 2..=6 {
        for lambda in [0.5, 1.0, 2.0, 3.0] {
            if lambda >= n as f64 {
                continue;
            }
            let z = enumerate(&params(n, lambda, 1.0), &ExactOptions::default())
                .unwrap()
                .z();
            assert!((z - 1.0).abs() <= 1e-12, "n={n} lambda={lambda} z={z}");
        }
    }
}

#[test]
fn finite_free_energy_gap_shrinks() {
    for (lambda, q) in [(1.0, 2.0), (0.5, 3.0)] {
        let limit = rate::free_energy(lambda, q).unwrap();
        let gap = |n| {
            let rep = enumerate(&params(n, lambda, q), &ExactOptions::default()).unwrap();
            (rep.finite_free_energy() - limit).abs()
        };
        assert!(gap(6) < gap(3), "lambda={lambda} q={q}");
    }
}

#[test]
fn identity_matches_small_examples() {
    for (n, lambda, q, r) in [(3, 1.0, 2.0, 3), (6, 2.0, 1.5, 2)] {
        let opts = ExactOptions {
            r_list: vec![r],
            ..ExactOptions::default()
        };
        let rep = enumerate(&params(n, lambda, q), &opts).unwrap();
        let id = tree::acyclic_partition_identity(n, lambda, q, r).unwrap();
        let exact = rep.threshold(r).unwrap().z_lb();
        assert!((id - exact).abs() <= 1e-9 * exact);
    }
    // r >= n leaves only the acyclic constraint
    let rep = enumerate(&params(5, 1.0, 2.0), &ExactOptions::default()).unwrap();
    let id = tree::acyclic_partition_identity(5, 1.0, 2.0, 5).unwrap();
    assert!((id - rep.z_l()).abs() <= 1e-9 * rep.z_l());
}

#[test]
fn b_r_bound_holds_on_small_grid() {
    for n in 2..=6 {
        for lambda in [0.5, 1.0, 2.0] {
            if lambda >= n as f64 {
                continue;
            }
            for q in [1.0, 2.0, 3.0] {
                let opts = ExactOptions {
                    r_list: (1..=n).collect(),
                    ..ExactOptions::default()
                };
                let rep = enumerate(&params(n, lambda, q), &opts).unwrap();
                for t in &rep.thresholds {
                    let bound =
                        rep.z_l() * (1.0 - lambda / n as f64).powf(-((t.r * n) as f64) / 2.0);
                    assert!(t.z_b() <= bound, "n={n} lambda={lambda} q={q} r={}", t.r);
                }
            }
        }
    }
}

#[test]
fn relabelled_edges_give_same_distributions() {
    let pm = params(4, 1.7, 2.3);
    let opts = ExactOptions {
        r_list: vec![1, 2],
        eps_list: vec![0.25],
        long_run: false,
    };
    let base = enumerate(&pm, &opts).unwrap();
    // vertex permutation (0 1 2 3) -> (2 0 3 1)
    let perm = [2, 0, 3, 1];
    let pairs: Vec<(usize, usize)> = edge_pairs(4)
        .into_iter()
        .map(|(i, j)| {
            let (a, b) = (perm[i], perm[j]);
            (a.min(b), a.max(b))
        })
        .collect();
    let other = enumerate_chunked(&pm, &opts, &pairs, 3).unwrap();
    for (a, b) in base.thresholds.iter().zip(&other.thresholds) {
        for ((ka, wa), (kb, wb)) in a.dist_v.entries().iter().zip(b.dist_v.entries()) {
            assert_eq!(*ka, kb);
            assert!((wa - wb).abs() <= 1e-14);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn connected_weight_scales_with_q(n in 3usize..=5, lambda in 0.1f64..2.9, q in 0.5f64..6.0) {
        let opts = ExactOptions::default();
        let zq = enumerate(&params(n, lambda, q), &opts).unwrap().z_k();
        let z1 = enumerate(&params(n, lambda, 1.0), &opts).unwrap().z_k();
        prop_assert!((zq - q * z1).abs() <= 1e-12 * q * z1);
    }

    #[test]
    fn endpoint_rates(lambda in 0.1f64..10.0, q in 0.5f64..10.0) {
        let e1 = rate::phi(1.0, lambda, q).unwrap() - rate::connected_rate(lambda).unwrap();
        let e0 = rate::phi(0.0, lambda, q).unwrap() - rate::acyclic_rate(lambda, q).unwrap();
        prop_assert!(e1.abs() <= 1e-12);
        prop_assert!(e0.abs() <= 1e-12);
    }

    #[test]
    fn distribution_masses_sum_to_z(n in 2usize..=5, lambda in 0.1f64..1.9, q in 0.3f64..4.0) {
        let opts = ExactOptions { r_list: vec![1], eps_list: vec![0.4], long_run: false };
        let rep = enumerate(&params(n, lambda, q), &opts).unwrap();
        let z = rep.z();
        prop_assert!((rep.dist_largest.total() - z).abs() <= 1e-12 * z);
        prop_assert!((rep.dist_k.total() - z).abs() <= 1e-12 * z);
        prop_assert!((rep.eps_events[0].dist_v.total() - z).abs() <= 1e-12 * z);
        prop_assert!(rep.z_k() <= z && rep.z_l() <= z);
    }
}
