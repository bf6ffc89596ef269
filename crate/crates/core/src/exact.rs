//! Exact and asymptotic evaluation of the model's closed-form probabilities
//! and the critical scaling inversion.
//!
//! The central quantities:
//!
//! - edge probability between a group-`i` node and a group-`j` node:
//!   `p_ij = 1 - C(P - K_i, K_j) / C(P, K_j)`,
//! - mean edge probability of a group-`i` node: `b_i = sum_j a_j * p_ij`,
//! - the deviation `beta_n` defined through `b_1 = (ln n + beta_n) / n`.
//!
//! Everything is computed in log space; the product form has at most `K_m`
//! factors, so pool sizes of 10^7 and beyond stay cheap and overflow-free.
//! Exactness against big-integer rationals is covered by tests, not by a
//! runtime big-integer mode.

use serde::Serialize;

use crate::model::ModelParams;
use crate::{Error, Result};

/// `C(P - A, B) / C(P, B)`, evaluated as
/// `exp(sum_{t=0}^{B-1} ln((P - A - t) / (P - t)))`.
///
/// Conventions on the boundary: returns 1 when `A = 0` or `B = 0`, and 0
/// when `B > P - A` (the numerator counts subsets of an insufficient set).
/// Errors when `A > P` or `B > P`.
pub fn binom_tail_ratio(p: u64, a: u64, b: u64) -> Result<f64> {
    if a > p {
        return Err(Error::Binomial { pool: p, subset: a });
    }
    if b > p {
        return Err(Error::Binomial { pool: p, subset: b });
    }
    if a == 0 || b == 0 {
        return Ok(1.0);
    }
    if b > p - a {
        return Ok(0.0);
    }
    let mut log_sum = 0.0f64;
    for t in 0..b {
        log_sum += (((p - a - t) as f64) / ((p - t) as f64)).ln();
    }
    Ok(log_sum.exp())
}

/// Probability that two nodes with ring sizes `ki` and `kj` drawn from a
/// pool of `p` keys share at least one key: `1 - C(p - ki, kj) / C(p, kj)`.
///
/// Symmetric in `(ki, kj)`; arguments are ordered internally so the two
/// orders produce bit-identical results (and the shorter product is used).
/// Ring size 0 is accepted and yields probability 0, which is what the
/// coupling searches over `[0, P]` rely on.
pub fn edge_prob(p: u64, ki: u64, kj: u64) -> Result<f64> {
    let (hi, lo) = if ki >= kj { (ki, kj) } else { (kj, ki) };
    Ok(1.0 - binom_tail_ratio(p, hi, lo)?)
}

/// `b_1` of an arbitrary ring-size vector: `sum_j a[j] * edge_prob(p, ks[0], ks[j])`,
/// accumulated left to right.
///
/// The coupling searches evaluate their bounds through this function so that
/// a candidate vector equal to the original one reproduces `b_1` bit for bit.
pub(crate) fn mean_edge_prob_of(p: u64, a: &[f64], ks: &[u64]) -> Result<f64> {
    let k0 = ks[0];
    let mut sum = 0.0f64;
    for (aj, &kj) in a.iter().zip(ks.iter()) {
        sum += aj * edge_prob(p, k0, kj)?;
    }
    Ok(sum)
}

/// Mean edge probability `b_i` of a group-`group` node (0-based index):
/// `sum_j a_j * edge_prob(P, K_group, K_j)`.
///
/// For `group = 0` this is the quantity the connectivity threshold is
/// expressed in.
pub fn mean_edge_prob(params: &ModelParams, group: usize) -> Result<f64> {
    params.ensure_valid()?;
    let ki = params.k[group];
    let mut sum = 0.0f64;
    for (aj, &kj) in params.a.iter().zip(params.k.iter()) {
        sum += aj * edge_prob(params.p, ki, kj)?;
    }
    Ok(sum)
}

/// Inverts `b1 = (ln n + beta) / n` for `beta`.
pub fn beta_from_b1(n: u64, b1: f64) -> f64 {
    (n as f64) * b1 - (n as f64).ln()
}

/// The deviation `beta_n` of the parameters from the critical scaling:
/// `n * b_1 - ln n`.
pub fn beta_from_params(params: &ModelParams) -> Result<f64> {
    params.ensure_valid()?;
    if params.n < 2 {
        return Err(Error::SmallN { n: params.n, min: 2 });
    }
    Ok(beta_from_b1(params.n, mean_edge_prob(params, 0)?))
}

/// First-order approximation `ki * kj / p` of [`edge_prob`].
///
/// May exceed 1; it is a diagnostic for the asymptotic regime and is never
/// substituted for the exact probability in any computation here.
pub fn approx_edge_prob(p: u64, ki: u64, kj: u64) -> f64 {
    (ki as f64) * (kj as f64) / (p as f64)
}

/// Finite-size surrogates for the asymptotic hypotheses of the connectivity
/// theorem. Advisory only: reported, never enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConditionFlags {
    /// `P >= n` (surrogate for `P = Omega(n)`).
    pub pool_at_least_n: bool,
    /// `K_1 >= sqrt(P / n)` (surrogate for `K_1 = omega(sqrt(P/n))`).
    pub k1_at_least_sqrt_p_over_n: bool,
    /// `K_m <= sqrt(P)` (surrogate for `K_m = o(sqrt(P))`).
    pub km_at_most_sqrt_p: bool,
    /// Ring sizes nondecreasing.
    pub k_sorted: bool,
    /// `m <= sqrt(n)`; the theory treats the group count as a constant, so a
    /// large `m` relative to `n` is flagged.
    pub m_small_vs_n: bool,
}

impl ConditionFlags {
    pub fn all(&self) -> bool {
        self.pool_at_least_n
            && self.k1_at_least_sqrt_p_over_n
            && self.km_at_most_sqrt_p
            && self.k_sorted
            && self.m_small_vs_n
    }
}

/// Evaluates [`ConditionFlags`] for a parameter set. Square-root comparisons
/// are done on integer squares, so there is no floating-point edge behavior.
pub fn check_theorem_conditions(params: &ModelParams) -> ConditionFlags {
    let k1 = params.k.first().copied().unwrap_or(0);
    let km = params.k.last().copied().unwrap_or(0);
    ConditionFlags {
        pool_at_least_n: params.p >= params.n,
        // K_1 >= sqrt(P/n)  <=>  K_1^2 * n >= P
        k1_at_least_sqrt_p_over_n: (k1 as u128) * (k1 as u128) * (params.n as u128)
            >= params.p as u128,
        // K_m <= sqrt(P)  <=>  K_m^2 <= P
        km_at_most_sqrt_p: (km as u128) * (km as u128) <= params.p as u128,
        k_sorted: params.k.windows(2).all(|w| w[0] <= w[1]),
        // m <= sqrt(n)  <=>  m^2 <= n
        m_small_vs_n: (params.m as u128) * (params.m as u128) <= params.n as u128,
    }
}

/// Full analytic report for one parameter set: the `m x m` edge-probability
/// matrix, the mean edge probabilities, `beta_n`, the first-order
/// approximations, and the advisory condition flags.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    /// `p[i][j] = edge_prob(P, K_i, K_j)`.
    pub p: Vec<Vec<f64>>,
    /// `b[i] = mean_edge_prob(params, i)`.
    pub b: Vec<f64>,
    /// `b[0]`, the critical quantity.
    pub b1: f64,
    /// `n * b1 - ln n`.
    pub beta_n: f64,
    /// `approx_p[i][j] = K_i * K_j / P`; may exceed 1.
    pub approx_p: Vec<Vec<f64>>,
    pub flags: ConditionFlags,
}

/// Builds a [`ScalingReport`] for valid parameters.
pub fn scaling_report(params: &ModelParams) -> Result<ScalingReport> {
    params.ensure_valid()?;
    let m = params.m;
    let mut p = vec![vec![0.0; m]; m];
    let mut approx_p = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            p[i][j] = edge_prob(params.p, params.k[i], params.k[j])?;
            approx_p[i][j] = approx_edge_prob(params.p, params.k[i], params.k[j]);
        }
    }
    let mut b = Vec::with_capacity(m);
    for i in 0..m {
        b.push(mean_edge_prob(params, i)?);
    }
    let b1 = b[0];
    Ok(ScalingReport {
        p,
        b,
        b1,
        beta_n: beta_from_b1(params.n, b1),
        approx_p,
        flags: check_theorem_conditions(params),
    })
}
