//! Equivalence of the fast component path with the direct-definition oracle,
//! plus the near-linear scaling smoke test.

mod support;

use std::collections::HashSet;
use std::time::Instant;

use keygraph::graph::{components, edge_exists, isolated_nodes, naive_components_capped};
use keygraph::model::{derive_stream, GraphSample, ModelParams, RngSeed};
use keygraph::sampler::sample_graph;
use rand::Rng;
use support::random_params;

#[test]
fn fast_components_equal_naive_on_random_instances() {
    let mut rng = RngSeed::new(0xc0ffee).rng();
    let base = RngSeed::new(0xfeed);
    for trial in 0..400u64 {
        let params = random_params(&mut rng, 3, 2, 120, 2, 40, 10);
        let sample = sample_graph(&params, &derive_stream(base, trial)).unwrap();
        let fast = components(&sample);
        let slow = naive_components_capped(&sample, 2000).unwrap();
        assert_eq!(fast, slow, "trial {trial}, params {params:?}");

        // isolated-node report against the pairwise definition
        let report = isolated_nodes(&sample);
        let direct: Vec<usize> = (0..sample.len())
            .filter(|&x| {
                (0..sample.len())
                    .all(|y| y == x || !edge_exists(&sample.rings[x], &sample.rings[y]))
            })
            .collect();
        assert_eq!(report.nodes, direct);
        assert_eq!(report.total, fast.isolated);
        assert_eq!(report.group1, fast.isolated_group1);
    }
}

#[test]
fn connected_implies_no_isolated_on_samples() {
    let mut rng = RngSeed::new(0xabcd).rng();
    let base = RngSeed::new(0xd00d);
    for trial in 0..300u64 {
        let params = random_params(&mut rng, 2, 2, 60, 2, 25, 8);
        let sample = sample_graph(&params, &derive_stream(base, trial)).unwrap();
        let summary = components(&sample);
        if summary.is_connected && sample.len() >= 2 {
            assert_eq!(summary.isolated, 0, "trial {trial}");
        }
        assert_eq!(summary.component_sizes.iter().sum::<usize>(), sample.len());
    }
}

#[test]
fn edge_exists_agrees_with_hash_intersection() {
    let mut rng = RngSeed::new(0x9999).rng();
    for _ in 0..2000 {
        let p = 50u64;
        let la = rng.gen_range(0..=10usize);
        let lb = rng.gen_range(0..=10usize);
        let mut a: Vec<u64> = (0..la).map(|_| rng.gen_range(0..p)).collect();
        let mut b: Vec<u64> = (0..lb).map(|_| rng.gen_range(0..p)).collect();
        a.sort_unstable();
        a.dedup();
        b.sort_unstable();
        b.dedup();
        let ha: HashSet<u64> = a.iter().copied().collect();
        let expected = b.iter().any(|x| ha.contains(x));
        assert_eq!(edge_exists(&a, &b), expected, "{a:?} vs {b:?}");
    }
}

/// Build + union is near-linear in the total key count: every measured size
/// sits within a factor 3 of the least-squares linear fit through the
/// origin.
#[test]
fn components_scaling_smoke() {
    let time_at = |n: u64| -> f64 {
        let params = ModelParams::new(n, 10 * n, vec![1.0], vec![20]);
        let sample = sample_graph(&params, &RngSeed::new(42)).unwrap();
        let mut best = f64::INFINITY;
        for _ in 0..5 {
            let start = Instant::now();
            let summary = components(&sample);
            let dt = start.elapsed().as_secs_f64();
            assert!(summary.num_components >= 1);
            best = best.min(dt);
        }
        best.max(1e-6)
    };
    let sizes = [1_000u64, 10_000, 100_000];
    let times: Vec<f64> = sizes.iter().map(|&n| time_at(n)).collect();
    let slope = sizes
        .iter()
        .zip(&times)
        .map(|(&n, &t)| n as f64 * t)
        .sum::<f64>()
        / sizes.iter().map(|&n| (n as f64) * (n as f64)).sum::<f64>();
    for (&n, &t) in sizes.iter().zip(&times) {
        let fit = slope * n as f64;
        let factor = t / fit;
        assert!(
            (1.0 / 3.0..=3.0).contains(&factor),
            "n={n}: measured {t:.6}s vs fit {fit:.6}s (factor {factor:.2}); all times {times:?}"
        );
    }
}

/// Deterministic fixture whose rings collide through shared buckets in a
/// nontrivial pattern, cross-checked against the oracle.
#[test]
fn bucket_heavy_fixture() {
    let rings: Vec<Vec<u64>> = vec![
        vec![0, 1, 2],
        vec![2, 3],
        vec![3, 4],
        vec![10, 11],
        vec![11, 12],
        vec![20],
        vec![21],
    ];
    let sample = GraphSample { groups: vec![0, 0, 1, 1, 0, 0, 1], rings };
    let fast = components(&sample);
    let slow = naive_components_capped(&sample, 100).unwrap();
    assert_eq!(fast, slow);
    assert_eq!(fast.num_components, 4);
    assert_eq!(fast.component_sizes, vec![1, 1, 2, 3]);
    assert_eq!(fast.isolated, 2);
    assert_eq!(fast.isolated_group1, 1);
}
