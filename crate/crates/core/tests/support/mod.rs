//! Shared test oracles, independent of the library's computation paths:
//! big-integer Pascal-triangle combinatorics and straight-line linear-scan
//! reimplementations of the coupling searches.
#![allow(dead_code)]

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use keygraph::ModelParams;

/// Exact binomial coefficients via a Pascal triangle of `BigUint`s.
pub struct Binomials {
    rows: Vec<Vec<BigUint>>,
}

impl Binomials {
    pub fn new(max_n: u64) -> Self {
        let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(max_n as usize + 1);
        for n in 0..=max_n as usize {
            let mut row = vec![BigUint::one(); n + 1];
            for k in 1..n {
                row[k] = &rows[n - 1][k - 1] + &rows[n - 1][k];
            }
            rows.push(row);
        }
        Binomials { rows }
    }

    pub fn c(&self, n: u64, k: u64) -> BigUint {
        if k > n {
            BigUint::zero()
        } else {
            self.rows[n as usize][k as usize].clone()
        }
    }

    /// `C(p - a, b) / C(p, b)` as an exact numerator/denominator pair.
    pub fn ratio(&self, p: u64, a: u64, b: u64) -> (BigUint, BigUint) {
        assert!(a <= p && b <= p);
        if a == 0 || b == 0 {
            return (BigUint::one(), BigUint::one());
        }
        (self.c(p - a, b), self.c(p, b))
    }

    /// The ratio above rounded once to `f64`.
    pub fn ratio_f64(&self, p: u64, a: u64, b: u64) -> f64 {
        let (num, den) = self.ratio(p, a, b);
        num.to_f64().unwrap() / den.to_f64().unwrap()
    }

    /// `1 - C(p - ki, kj) / C(p, kj)` with exact combinatorics.
    pub fn edge_prob_f64(&self, p: u64, ki: u64, kj: u64) -> f64 {
        1.0 - self.ratio_f64(p, ki, kj)
    }

    /// Mean edge probability of a ring-size vector, first endpoint `ks[0]`.
    pub fn b1_f64(&self, p: u64, a: &[f64], ks: &[u64]) -> f64 {
        a.iter()
            .zip(ks.iter())
            .map(|(aj, &kj)| aj * self.edge_prob_f64(p, ks[0], kj))
            .sum()
    }
}

/// Relative error against an oracle value, safe near zero.
pub fn rel_err(x: f64, exact: f64) -> f64 {
    if exact == 0.0 {
        x.abs()
    } else {
        (x - exact).abs() / exact.abs()
    }
}

/// A random valid parameter set: `m` groups, sorted ring sizes in
/// `[1, min(p, k_cap)]`, normalized positive probabilities.
pub fn random_params(
    rng: &mut impl Rng,
    max_m: usize,
    n_lo: u64,
    n_hi: u64,
    p_lo: u64,
    p_hi: u64,
    k_cap: u64,
) -> ModelParams {
    let m = rng.gen_range(1..=max_m);
    let p = rng.gen_range(p_lo..=p_hi);
    let k_hi = p.min(k_cap);
    let mut k: Vec<u64> = (0..m).map(|_| rng.gen_range(1..=k_hi)).collect();
    k.sort_unstable();
    let mut a: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..1.0)).collect();
    let sum: f64 = a.iter().sum();
    a.iter_mut().for_each(|v| *v /= sum);
    let n = rng.gen_range(n_lo..=n_hi);
    ModelParams::new(n, p, a, k)
}

/// Trace of the straight-line subgraph-transform oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoundTrace {
    pub t_n: u64,
    /// 0-based last group at or below the cap; `None` on the all-cap branch.
    pub ell: Option<usize>,
    /// `(0-based group, floor value)` in execution order; sentinel `p + 1`
    /// when the bound is unreachable.
    pub q: Vec<(usize, u64)>,
    pub k_out: Vec<u64>,
}

/// Straight-line reimplementation of the subgraph transform with exact
/// combinatorics and full-domain linear scans, no binary search and no
/// shared code with the library path.
pub fn pound_oracle(bin: &Binomials, params: &ModelParams, beta: f64) -> PoundTrace {
    let n = params.n;
    let p = params.p;
    let m = params.m;
    let k = &params.k;
    let beta_tilde = beta.min((n as f64).ln().ln());
    let bound = ((n as f64).ln() + beta_tilde) / n as f64;

    let t_n = (0..=p)
        .filter(|&y| bin.edge_prob_f64(p, y, y) <= bound)
        .max()
        .unwrap_or(0);

    if k[0] >= t_n {
        return PoundTrace { t_n, ell: None, q: Vec::new(), k_out: vec![t_n; m] };
    }

    let ell = (0..m).filter(|&j| k[j] <= t_n).max().expect("k[0] < t_n implies k[0] <= t_n");
    let mut out: Vec<u64> = k[..=ell].to_vec();
    let mut q = Vec::new();
    for j in (ell + 1)..m {
        let lhs = |z: u64| {
            let mut v = out.clone();
            v.push(z);
            v.extend_from_slice(&k[j + 1..]);
            bin.b1_f64(p, &params.a, &v)
        };
        let q_j = (0..=p).find(|&z| lhs(z) >= bound).unwrap_or(p + 1);
        q.push((j, q_j));
        if q_j > t_n {
            out.push(if q_j == p + 1 { k[j] } else { q_j });
            out.extend_from_slice(&k[j + 1..]);
            break;
        }
        out.push(t_n);
    }
    PoundTrace { t_n, ell: Some(ell), q, k_out: out }
}

/// Straight-line supergraph-transform oracle: linear scan for the maximal
/// last ring size whose mean edge probability respects the clamped bound.
/// `None` when even ring size 0 violates the bound.
pub fn star_oracle(bin: &Binomials, params: &ModelParams, beta: f64) -> Option<Vec<u64>> {
    let n = params.n;
    let p = params.p;
    let beta_tilde = beta.max(-(n as f64).ln().ln());
    let bound = ((n as f64).ln() + beta_tilde) / n as f64;
    let lhs = |x: u64| {
        let mut v = params.k.clone();
        *v.last_mut().unwrap() = x;
        bin.b1_f64(p, &params.a, &v)
    };
    let km = (0..=p).filter(|&x| lhs(x) <= bound).max()?;
    let mut k_out = params.k.clone();
    *k_out.last_mut().unwrap() = km;
    Some(k_out)
}
