//! Draws graph realizations from the law, including coupled pairs that put a
//! spanning subgraph and its supergraph on one probability space.
//!
//! Everything is a pure function of `(params, seed)`; trials parallelize by
//! deriving disjoint streams with [`crate::model::derive_stream`].

use rand::Rng;
use std::collections::HashSet;

use crate::model::{GraphSample, ModelParams, RngSeed};
use crate::{Error, Result};

/// Independent categorical draws: node `x` lands in group `i` with
/// probability `a_i`. Deterministic given the seed.
pub fn assign_groups(params: &ModelParams, seed: &RngSeed) -> Result<Vec<u32>> {
    params.ensure_valid()?;
    Ok(assign_groups_with(params, &mut seed.rng()))
}

/// As [`assign_groups`], drawing from a caller-provided generator.
/// Assumes validated parameters.
pub fn assign_groups_with<R: Rng>(params: &ModelParams, rng: &mut R) -> Vec<u32> {
    let mut cum = Vec::with_capacity(params.m);
    let mut acc = 0.0f64;
    for &ai in &params.a {
        acc += ai;
        cum.push(acc);
    }
    (0..params.n)
        .map(|_| {
            let u: f64 = rng.gen();
            // the final bucket absorbs any rounding slack in the cumulative sum
            cum.iter().position(|&c| u < c).unwrap_or(params.m - 1) as u32
        })
        .collect()
}

/// A uniformly random `k`-subset of `[0, p)`, sorted ascending. Every
/// `k`-subset is equally likely. Errors when `k > p`.
pub fn sample_key_ring(p: u64, k: u64, seed: &RngSeed) -> Result<Vec<u64>> {
    sample_key_ring_with(p, k, &mut seed.rng())
}

/// As [`sample_key_ring`], drawing from a caller-provided generator.
///
/// Uses Floyd's subset-sampling algorithm: O(k) draws, no O(p) shuffle, so a
/// pool of 10^7 keys with rings of a few dozen costs a few dozen draws.
pub fn sample_key_ring_with<R: Rng>(p: u64, k: u64, rng: &mut R) -> Result<Vec<u64>> {
    if k > p {
        return Err(Error::RingExceedsPool { pool: p, ring: k });
    }
    let mut chosen: HashSet<u64> = HashSet::with_capacity(k as usize);
    for j in (p - k)..p {
        let t = rng.gen_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    let mut ring: Vec<u64> = chosen.into_iter().collect();
    ring.sort_unstable();
    Ok(ring)
}

/// One realization: group assignment, then an independent key ring per node
/// with the ring size of its group. Edges stay implicit (the shared-key
/// predicate); nothing quadratic is materialized here.
pub fn sample_graph(params: &ModelParams, seed: &RngSeed) -> Result<GraphSample> {
    params.ensure_valid()?;
    sample_graph_with(params, &mut seed.rng())
}

/// As [`sample_graph`], drawing from a caller-provided generator.
/// Assumes validated parameters apart from ring-size checks.
pub fn sample_graph_with<R: Rng>(params: &ModelParams, rng: &mut R) -> Result<GraphSample> {
    let groups = assign_groups_with(params, rng);
    let mut rings = Vec::with_capacity(groups.len());
    for &g in &groups {
        rings.push(sample_key_ring_with(params.p, params.k[g as usize], rng)?);
    }
    Ok(GraphSample { groups, rings })
}

/// Samples a supergraph realization and a subgraph realization on one
/// probability space: the two share the group assignment, and each sub-ring
/// is a uniformly random subset of the corresponding super-ring.
///
/// A uniform `k_sub`-subset of a uniform `k_super`-subset of the pool is a
/// uniform `k_sub`-subset of the pool, so both outputs have the correct
/// marginal law, and every edge of the sub-realization is an edge of the
/// super-realization by construction.
///
/// Requires equal `n`, `m`, `a`, `P` and `k_sub[j] <= k_super[j]` for all `j`.
pub fn coupled_sample(
    params_super: &ModelParams,
    params_sub: &ModelParams,
    seed: &RngSeed,
) -> Result<(GraphSample, GraphSample)> {
    params_super.ensure_valid()?;
    params_sub.ensure_valid()?;
    if params_super.n != params_sub.n
        || params_super.m != params_sub.m
        || params_super.p != params_sub.p
        || params_super.a != params_sub.a
    {
        return Err(Error::CouplingInput(
            "n, m, a, and P must match between the two laws".into(),
        ));
    }
    if let Some(j) = (0..params_super.m).find(|&j| params_sub.k[j] > params_super.k[j]) {
        return Err(Error::CouplingInput(format!(
            "K_sub[{}]={} exceeds K_super[{}]={}",
            j + 1,
            params_sub.k[j],
            j + 1,
            params_super.k[j]
        )));
    }

    let mut rng = seed.rng();
    let sup = sample_graph_with(params_super, &mut rng)?;
    let mut sub_rings = Vec::with_capacity(sup.len());
    for (x, super_ring) in sup.rings.iter().enumerate() {
        let k_sub = params_sub.k[sup.groups[x] as usize];
        let idx = sample_key_ring_with(super_ring.len() as u64, k_sub, &mut rng)?;
        // positions are sorted, so the mapped ring stays sorted
        sub_rings.push(idx.into_iter().map(|i| super_ring[i as usize]).collect());
    }
    let sub = GraphSample { groups: sup.groups.clone(), rings: sub_rings };
    Ok((sup, sub))
}

/// Writes the line-oriented sample text format:
///
/// ```text
/// keygraph-sample v1 n=<n> m=<m> P=<P>
/// <node> <group> <key> <key> ...
/// ```
///
/// Groups are 1-based, keys ascending. The format exists for debugging and
/// cross-implementation diffing, so it is stable and fully ordered.
pub fn sample_to_text(sample: &GraphSample, m: usize, p: u64) -> String {
    let mut out = String::new();
    out.push_str(&format!("keygraph-sample v1 n={} m={} P={}\n", sample.len(), m, p));
    for (x, ring) in sample.rings.iter().enumerate() {
        out.push_str(&format!("{} {}", x, sample.groups[x] + 1));
        for key in ring {
            out.push_str(&format!(" {key}"));
        }
        out.push('\n');
    }
    out
}

/// Parses the format written by [`sample_to_text`]. Returns the sample plus
/// the `(m, P)` recorded in the header. Rings must be sorted, distinct, in
/// `[0, P)`, and sized consistently with the header.
pub fn sample_from_text(text: &str) -> Result<(GraphSample, usize, u64)> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty sample file".into()))?;
    let mut n = None;
    let mut m = None;
    let mut p = None;
    let mut fields = header.split_whitespace();
    if fields.next() != Some("keygraph-sample") || fields.next() != Some("v1") {
        return Err(Error::Parse("expected header 'keygraph-sample v1 ...'".into()));
    }
    for field in fields {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad header field {field}")))?;
        let parsed: u64 =
            value.parse().map_err(|_| Error::Parse(format!("bad header value {field}")))?;
        match key {
            "n" => n = Some(parsed),
            "m" => m = Some(parsed as usize),
            "P" => p = Some(parsed),
            _ => return Err(Error::Parse(format!("unknown header field {key}"))),
        }
    }
    let (n, m, p) = match (n, m, p) {
        (Some(n), Some(m), Some(p)) => (n, m, p),
        _ => return Err(Error::Parse("header must carry n, m, and P".into())),
    };

    let mut groups = Vec::with_capacity(n as usize);
    let mut rings = Vec::with_capacity(n as usize);
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let bad = |what: &str| Error::Parse(format!("node line {}: {what}", i + 1));
        let node: usize =
            fields.next().ok_or_else(|| bad("missing node id"))?.parse().map_err(|_| bad("bad node id"))?;
        if node != groups.len() {
            return Err(bad("node ids must be 0,1,2,... in order"));
        }
        let group: usize =
            fields.next().ok_or_else(|| bad("missing group"))?.parse().map_err(|_| bad("bad group"))?;
        if group == 0 || group > m {
            return Err(bad("group out of range"));
        }
        let mut ring = Vec::new();
        for field in fields {
            let key: u64 = field.parse().map_err(|_| bad("bad key id"))?;
            if key >= p {
                return Err(bad("key id out of range"));
            }
            if let Some(&last) = ring.last() {
                if key <= last {
                    return Err(bad("ring must be sorted and distinct"));
                }
            }
            ring.push(key);
        }
        groups.push((group - 1) as u32);
        rings.push(ring);
    }
    if groups.len() != n as usize {
        return Err(Error::Parse(format!(
            "header says n={n} but {} node lines follow",
            groups.len()
        )));
    }
    Ok((GraphSample { groups, rings }, m, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::edge_exists;
    use crate::model::derive_stream;

    fn params(n: u64, p: u64, a: &[f64], k: &[u64]) -> ModelParams {
        ModelParams::new(n, p, a.to_vec(), k.to_vec())
    }

    #[test]
    fn single_group_is_degenerate() {
        let pr = params(50, 10, &[1.0], &[3]);
        let groups = assign_groups(&pr, &RngSeed::new(1)).unwrap();
        assert!(groups.iter().all(|&g| g == 0));
    }

    #[test]
    fn group_frequencies_match_probabilities() {
        let pr = params(100_000, 10, &[0.5, 0.5], &[2, 3]);
        let groups = assign_groups(&pr, &RngSeed::new(7)).unwrap();
        let frac = groups.iter().filter(|&&g| g == 0).count() as f64 / pr.n as f64;
        // 3-sigma binomial bound is ~0.0047; tolerance doubled
        assert!((frac - 0.5).abs() < 0.01, "group-1 fraction {frac}");
    }

    #[test]
    fn assignment_is_deterministic() {
        let pr = params(1000, 10, &[0.3, 0.7], &[2, 3]);
        let seed = RngSeed::new(99);
        assert_eq!(assign_groups(&pr, &seed).unwrap(), assign_groups(&pr, &seed).unwrap());
    }

    #[test]
    fn full_ring_when_k_equals_p() {
        let ring = sample_key_ring(6, 6, &RngSeed::new(3)).unwrap();
        assert_eq!(ring, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn ring_shape_always_holds() {
        let mut rng = RngSeed::new(11).rng();
        for _ in 0..200 {
            let p = rng.gen_range(1..=40u64);
            let k = rng.gen_range(1..=p);
            let ring = sample_key_ring_with(p, k, &mut rng).unwrap();
            assert_eq!(ring.len() as u64, k);
            assert!(ring.windows(2).all(|w| w[0] < w[1]), "sorted distinct");
            assert!(ring.iter().all(|&id| id < p));
        }
    }

    #[test]
    fn oversized_ring_rejected() {
        assert!(matches!(
            sample_key_ring(3, 4, &RngSeed::new(0)),
            Err(Error::RingExceedsPool { pool: 3, ring: 4 })
        ));
    }

    #[test]
    fn full_pool_rings_are_adjacent() {
        let pr = params(2, 4, &[1.0], &[4]);
        let g = sample_graph(&pr, &RngSeed::new(5)).unwrap();
        assert_eq!(g.rings[0], g.rings[1]);
        assert!(edge_exists(&g.rings[0], &g.rings[1]));
    }

    #[test]
    fn sample_graph_is_deterministic() {
        let pr = params(40, 30, &[0.5, 0.5], &[2, 5]);
        let seed = derive_stream(RngSeed::new(123), 9);
        assert_eq!(sample_graph(&pr, &seed).unwrap(), sample_graph(&pr, &seed).unwrap());
    }

    #[test]
    fn coupled_identical_k_means_identical_rings() {
        let pr = params(30, 20, &[0.5, 0.5], &[2, 4]);
        let (sup, sub) = coupled_sample(&pr, &pr, &RngSeed::new(8)).unwrap();
        assert_eq!(sup, sub);
    }

    #[test]
    fn coupled_rejects_mismatches() {
        let a = params(30, 20, &[0.5, 0.5], &[2, 4]);
        let mut b = a.clone();
        b.p = 21;
        assert!(coupled_sample(&a, &b, &RngSeed::new(0)).is_err());
        let mut c = a.clone();
        c.k = vec![3, 4]; // K_sub[1] > K_super[1]
        assert!(coupled_sample(&a, &c, &RngSeed::new(0)).is_err());
    }

    #[test]
    fn coupled_sub_rings_are_subsets() {
        let sup_p = params(50, 40, &[0.4, 0.6], &[3, 6]);
        let sub_p = params(50, 40, &[0.4, 0.6], &[2, 4]);
        let (sup, sub) = coupled_sample(&sup_p, &sub_p, &RngSeed::new(21)).unwrap();
        assert_eq!(sup.groups, sub.groups);
        for x in 0..sup.len() {
            assert!(sub.rings[x].iter().all(|id| sup.rings[x].binary_search(id).is_ok()));
            assert_eq!(sub.rings[x].len() as u64, sub_p.k[sup.groups[x] as usize]);
        }
    }

    #[test]
    fn text_round_trip() {
        let pr = params(12, 25, &[0.5, 0.5], &[2, 4]);
        let g = sample_graph(&pr, &RngSeed::new(33)).unwrap();
        let text = sample_to_text(&g, pr.m, pr.p);
        let (parsed, m, p) = sample_from_text(&text).unwrap();
        assert_eq!(parsed, g);
        assert_eq!((m, p), (pr.m, pr.p));
    }

    #[test]
    fn text_rejects_malformed_input() {
        assert!(sample_from_text("").is_err());
        assert!(sample_from_text("keygraph-sample v2 n=1 m=1 P=5\n0 1 0\n").is_err());
        assert!(sample_from_text("keygraph-sample v1 n=1 m=1 P=5\n0 1 3 2\n").is_err());
        assert!(sample_from_text("keygraph-sample v1 n=2 m=1 P=5\n0 1 0\n").is_err());
        assert!(sample_from_text("keygraph-sample v1 n=1 m=1 P=5\n0 2 0\n").is_err());
    }
}
