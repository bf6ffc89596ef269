//! Coupling transforms against straight-line exact-arithmetic oracles.

mod support;

use keygraph::coupling::{
    min_group_ring, self_pairing_cap, subgraph_coupling, subgraph_coupling_mode,
    supergraph_coupling, supergraph_coupling_mode, verify_coupling, SearchMode,
};
use keygraph::exact::beta_from_params;
use keygraph::model::RngSeed;
use keygraph::Error;
use rand::Rng;
use support::{pound_oracle, random_params, star_oracle, Binomials};

/// Full-trace equality with the straight-line subgraph oracle. The deviation
/// is offset below the parameter-implied value so that no predicate sits on
/// a floating-point knife edge between the two arithmetic routes.
#[test]
fn subgraph_trace_matches_rational_oracle() {
    let bin = Binomials::new(40);
    let mut rng = RngSeed::new(0x0a11ce).rng();
    for trial in 0..300u64 {
        let params = random_params(&mut rng, 4, 3, 200, 2, 40, 40);
        let beta_true = beta_from_params(&params).unwrap();
        let delta: f64 = rng.gen_range(0.05..0.8);
        let beta = beta_true - delta;

        let lib = subgraph_coupling(&params, Some(beta)).unwrap();
        let oracle = pound_oracle(&bin, &params, beta);

        assert_eq!(lib.t_n, Some(oracle.t_n), "trial {trial} T_n, params {params:?}");
        assert_eq!(lib.ell, oracle.ell.map(|e| e + 1), "trial {trial} ell");
        let lib_q: Vec<(usize, u64)> = lib.q.iter().map(|e| (e.group - 1, e.value)).collect();
        assert_eq!(lib_q, oracle.q, "trial {trial} floors");
        assert_eq!(lib.k_out, oracle.k_out, "trial {trial} K_out");

        // offsetting the deviation downward keeps the shrink guarantee
        assert!(lib.k_out.iter().zip(&params.k).all(|(o, k)| o <= k), "trial {trial}");
    }
}

/// The supergraph transform against its scan oracle under offset deviations
/// (both signs; a negative offset can make the search infeasible for
/// multi-group instances, which both routes must agree on).
#[test]
fn supergraph_matches_scan_oracle() {
    let bin = Binomials::new(50);
    let mut rng = RngSeed::new(0x57a2).rng();
    let mut infeasible_seen = 0u32;
    for trial in 0..300u64 {
        let params = random_params(&mut rng, 3, 3, 200, 2, 50, 50);
        let beta_true = beta_from_params(&params).unwrap();
        let delta: f64 = rng.gen_range(-0.8..0.8);
        let delta = if delta.abs() < 0.05 { 0.05 } else { delta };
        let beta = beta_true + delta;

        match (supergraph_coupling(&params, Some(beta)), star_oracle(&bin, &params, beta)) {
            (Ok(lib), Some(k_out)) => {
                assert_eq!(lib.k_out, k_out, "trial {trial}, params {params:?}");
            }
            (Err(Error::Infeasible(_)), None) => {
                infeasible_seen += 1;
            }
            (lib, oracle) => panic!(
                "trial {trial}: library {:?} disagrees with oracle {oracle:?}",
                lib.map(|r| r.k_out)
            ),
        }
    }
    // m = 1 instances can never be infeasible; multi-group ones can
    assert!(infeasible_seen < 300);
}

/// Single-group supergraph instances: the maximal ring size whose
/// self-pairing mean stays under the clamped bound.
#[test]
fn supergraph_single_group_self_pairing() {
    let bin = Binomials::new(50);
    let mut rng = RngSeed::new(0x1111).rng();
    for _ in 0..100 {
        let params = random_params(&mut rng, 1, 3, 500, 2, 50, 50);
        let lib = supergraph_coupling(&params, None).unwrap();
        let beta = beta_from_params(&params).unwrap();
        let oracle = star_oracle(&bin, &params, beta).expect("consistent beta is feasible");
        assert_eq!(lib.k_out, oracle);
        assert!(lib.k_out[0] >= params.k[0]);
        assert!(lib.all_checks_passed(), "{:#?}", lib.checks);
    }
}

/// Binary search equals the linear-scan mode on every small instance, for
/// both directions, with the parameter-implied deviation.
#[test]
fn binary_and_linear_modes_agree() {
    let mut rng = RngSeed::new(0xb1a2).rng();
    for trial in 0..200u64 {
        let params = random_params(&mut rng, 4, 3, 300, 2, 50, 50);
        let sub_b = subgraph_coupling_mode(&params, None, SearchMode::Binary).unwrap();
        let sub_l = subgraph_coupling_mode(&params, None, SearchMode::Linear).unwrap();
        assert_eq!(sub_b.k_out, sub_l.k_out, "trial {trial}");
        assert_eq!(sub_b.t_n, sub_l.t_n);
        let q_b: Vec<u64> = sub_b.q.iter().map(|e| e.value).collect();
        let q_l: Vec<u64> = sub_l.q.iter().map(|e| e.value).collect();
        assert_eq!(q_b, q_l);

        let sup_b = supergraph_coupling_mode(&params, None, SearchMode::Binary).unwrap();
        let sup_l = supergraph_coupling_mode(&params, None, SearchMode::Linear).unwrap();
        assert_eq!(sup_b.k_out, sup_l.k_out, "trial {trial}");
    }
}

/// Structural guarantees at the parameter-implied deviation: coordinatewise
/// shrink, monotone output, growth of the last coordinate, and all recorded
/// witnesses.
#[test]
fn consistent_beta_structural_invariants() {
    let mut rng = RngSeed::new(0x5eed_cafe).rng();
    for trial in 0..300u64 {
        let params = random_params(&mut rng, 4, 3, 400, 2, 50, 50);
        let sub = subgraph_coupling(&params, None).unwrap();
        assert!(sub.k_out.iter().zip(&params.k).all(|(o, k)| o <= k), "trial {trial}");
        assert!(sub.k_out.windows(2).all(|w| w[0] <= w[1]), "trial {trial}");
        assert!(sub.all_checks_passed(), "trial {trial}: {:#?}", sub.checks);
        assert!(sub.beta_matches_params);

        let sup = supergraph_coupling(&params, None).unwrap();
        assert_eq!(sup.k_out[..params.m - 1], params.k[..params.m - 1]);
        assert!(sup.k_out[params.m - 1] >= params.k[params.m - 1], "trial {trial}");
        assert!(sup.all_checks_passed(), "trial {trial}: {:#?}", sup.checks);
    }
}

/// The cap and floor searches against scan oracles over the whole domain.
#[test]
fn cap_and_floor_match_scans() {
    let bin = Binomials::new(50);
    let mut rng = RngSeed::new(0x7ab1e).rng();
    for _ in 0..200 {
        let p = rng.gen_range(2..=50u64);
        let n = rng.gen_range(2..=1000u64);
        let beta_tilde = rng.gen_range(-2.0..3.0);
        let bound = ((n as f64).ln() + beta_tilde) / n as f64;
        let cap = self_pairing_cap(p, n, beta_tilde, SearchMode::Binary).unwrap();
        let scan = (0..=p).filter(|&y| bin.edge_prob_f64(p, y, y) <= bound).max();
        match scan {
            Some(v) => {
                assert!(!cap.negative_threshold);
                assert_eq!(cap.value, v);
            }
            None => {
                assert!(cap.negative_threshold);
                assert_eq!(cap.value, 0);
            }
        }
    }

    for _ in 0..200 {
        let params = random_params(&mut rng, 4, 3, 300, 2, 50, 50);
        if params.m < 2 {
            continue;
        }
        let group = rng.gen_range(1..params.m);
        let prefix: Vec<u64> = params.k[..group].to_vec();
        let beta_tilde = rng.gen_range(-1.0..2.0);
        let bound = ((params.n as f64).ln() + beta_tilde) / params.n as f64;
        let floor =
            min_group_ring(&params, &prefix, group, beta_tilde, SearchMode::Binary).unwrap();
        let lhs = |z: u64| {
            let mut v = prefix.clone();
            v.push(z);
            v.extend_from_slice(&params.k[group + 1..]);
            bin.b1_f64(params.p, &params.a, &v)
        };
        let scan = (0..=params.p).find(|&z| lhs(z) >= bound);
        match scan {
            Some(v) => {
                assert!(!floor.infeasible);
                assert_eq!(floor.value, v, "params {params:?} group {group}");
            }
            None => {
                assert!(floor.infeasible);
                assert_eq!(floor.value, params.p + 1);
            }
        }
    }
}

/// Tampering with any reported quantity flips the corresponding check.
#[test]
fn verification_negative_controls() {
    let params = keygraph::ModelParams::new(50, 40, vec![0.3, 0.7], vec![2, 9]);
    let good = subgraph_coupling(&params, None).unwrap();
    assert!(good.all_checks_passed(), "{:#?}", good.checks);

    let mut shuffled = good.clone();
    shuffled.k_out.reverse();
    if shuffled.k_out != good.k_out {
        let checks = verify_coupling(&shuffled, &params);
        assert!(checks.iter().any(|c| !c.passed));
    }

    let mut wrong_beta = good;
    wrong_beta.beta_out += 1.0;
    let checks = verify_coupling(&wrong_beta, &params);
    assert!(checks.iter().any(|c| c.name == "beta_out_consistent" && !c.passed));
}
