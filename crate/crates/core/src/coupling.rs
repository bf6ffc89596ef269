//! Ring-size transforms that couple a graph law with a spanning supergraph
//! or spanning subgraph law, plus runtime verification of the structural
//! invariants the transforms guarantee.
//!
//! Supergraph direction: clamp the deviation from below at `-ln ln n`, then
//! grow the largest ring size to the maximal value keeping the mean edge
//! probability within `(ln n + beta~) / n`. Only the last coordinate moves.
//!
//! Subgraph direction: clamp the deviation from above at `ln ln n`, compute
//! the self-pairing cap `T_n`, keep ring sizes already at or below the cap,
//! and walk the remaining groups upward, giving each either the cap or the
//! minimal ring size that pushes the mixed mean edge probability up to the
//! bound (stopping at the first group that needs more than the cap).
//!
//! All searches run over `[0, P]`; ring size 0 contributes edge probability
//! 0, which keeps every expression defined on the whole domain. Monotonicity
//! of the expressions in the searched coordinate licenses binary search; a
//! linear [`SearchMode`] is kept as the slow reference path.

use serde::Serialize;

use crate::exact::{beta_from_b1, edge_prob, mean_edge_prob, mean_edge_prob_of};
use crate::model::ModelParams;
use crate::search::{max_satisfying, max_satisfying_linear, min_satisfying, min_satisfying_linear};
use crate::{Error, Result};

/// Betas within this distance of the parameter-implied value count as
/// matching.
pub const BETA_MATCH_TOL: f64 = 1e-6;

/// Slack for verification comparisons that re-evaluate sums in a different
/// association order than the search did.
const CHECK_REL_TOL: f64 = 1e-12;

/// Slack for beta-space window checks.
const BETA_WINDOW_TOL: f64 = 1e-9;

/// Which transform produced a [`CouplingResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CouplingDirection {
    /// Supergraph direction (`star` in the CLI vocabulary).
    #[serde(rename = "star")]
    Supergraph,
    /// Subgraph direction (`pound` in the CLI vocabulary).
    #[serde(rename = "pound")]
    Subgraph,
}

/// Integer search strategy. `Binary` is the default; `Linear` is the
/// debug fallback that scans the whole domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Binary,
    Linear,
}

/// Boundary witness of one search: the expression value at the result and
/// at the adjacent value on the failing side, plus the bound both were
/// compared against.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SearchWitness {
    pub arg: u64,
    pub lhs_at_arg: f64,
    /// Expression at `arg + 1` for maximal searches, `arg - 1` for minimal
    /// ones; `None` when the domain ends at `arg`.
    pub lhs_adjacent: Option<f64>,
    pub bound: f64,
}

/// One per-group floor search of the subgraph transform.
#[derive(Debug, Clone, Serialize)]
pub struct QEntry {
    /// 1-based group index.
    pub group: usize,
    /// Minimal ring size reaching the bound; `P + 1` when unreachable.
    pub value: u64,
    /// True when even ring size `P` stays below the bound; the transform
    /// then leaves the group's original ring size in place.
    pub infeasible: bool,
    pub witness: SearchWitness,
}

/// Outcome of one named invariant verification.
#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Output of a coupling transform, including every intermediate quantity
/// and the verification outcomes.
#[derive(Debug, Clone, Serialize)]
pub struct CouplingResult {
    pub direction: CouplingDirection,
    /// Transformed ring-size vector.
    #[serde(rename = "K_out")]
    pub k_out: Vec<u64>,
    /// Deviation the transform was invoked with.
    pub beta_input: f64,
    /// Clamped deviation: `max(beta, -ln ln n)` (supergraph) or
    /// `min(beta, ln ln n)` (subgraph).
    pub beta_tilde: f64,
    /// Deviation of the transformed vector: `n * b1(K_out) - ln n`.
    pub beta_out: f64,
    /// The bound `(ln n + beta_tilde) / n` every search compared against.
    pub bound: f64,
    /// True when the bound is negative; searches then degenerate to 0.
    pub negative_threshold: bool,
    /// Self-pairing cap (subgraph direction only).
    #[serde(rename = "T_n")]
    pub t_n: Option<u64>,
    /// 1-based index of the last group at or below the cap (subgraph
    /// direction, mixed branch only).
    pub ell: Option<usize>,
    /// Per-group floor searches, in execution order (subgraph only).
    #[serde(rename = "Q")]
    pub q: Vec<QEntry>,
    /// 1-based group where the subgraph walk stopped early, if it did.
    pub stopped_early_at: Option<usize>,
    /// Cap witness (subgraph) — the maximality evidence for `T_n`.
    pub t_n_witness: Option<SearchWitness>,
    /// Largest-ring witness (supergraph) — the maximality evidence.
    pub k_m_witness: Option<SearchWitness>,
    /// Whether `beta_input` is within [`BETA_MATCH_TOL`] of the
    /// parameter-implied deviation.
    pub beta_matches_params: bool,
    /// Whether the invocation lies in the regime the transform is meant
    /// for: `beta <= -ln ln n` (supergraph) or `beta >= ln ln n` (subgraph).
    pub in_regime: bool,
    pub checks: Vec<CheckOutcome>,
}

impl CouplingResult {
    /// True when every verification check passed.
    pub fn all_checks_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn require_n(n: u64, min: u64) -> Result<()> {
    if n < min {
        return Err(Error::SmallN { n, min });
    }
    Ok(())
}

/// `max(beta, -ln ln n)`: the deviation clamped from below, as used by the
/// supergraph transform. Requires `n >= 3`.
pub fn beta_clamped_low(beta: f64, n: u64) -> Result<f64> {
    require_n(n, 3)?;
    Ok(beta.max(-(n as f64).ln().ln()))
}

/// `min(beta, ln ln n)`: the deviation clamped from above, as used by the
/// subgraph transform. Requires `n >= 3`.
pub fn beta_clamped_high(beta: f64, n: u64) -> Result<f64> {
    require_n(n, 3)?;
    Ok(beta.min((n as f64).ln().ln()))
}

/// Outcome of the self-pairing cap search.
#[derive(Debug, Clone, Copy)]
pub struct CapOutcome {
    /// Maximal `Y` in `[0, P]` whose self-pairing edge probability stays at
    /// or below the bound; 0 with `negative_threshold` set when the bound is
    /// negative.
    pub value: u64,
    pub negative_threshold: bool,
    pub witness: SearchWitness,
}

/// Maximal ring size `Y` in `[0, P]` with `edge_prob(P, Y, Y) <= (ln n + beta_tilde) / n`.
///
/// The expression is strictly increasing in `Y` until it saturates at 1, so
/// monotone search applies. Requires `n >= 2`.
pub fn self_pairing_cap(p: u64, n: u64, beta_tilde: f64, mode: SearchMode) -> Result<CapOutcome> {
    require_n(n, 2)?;
    if p == 0 {
        return Err(Error::Binomial { pool: 0, subset: 1 });
    }
    let bound = ((n as f64).ln() + beta_tilde) / n as f64;
    cap_with_bound(p, bound, mode)
}

fn cap_with_bound(p: u64, bound: f64, mode: SearchMode) -> Result<CapOutcome> {
    let lhs = |y: u64| edge_prob(p, y, y);
    if bound < 0.0 {
        return Ok(CapOutcome {
            value: 0,
            negative_threshold: true,
            witness: SearchWitness {
                arg: 0,
                lhs_at_arg: lhs(0)?,
                lhs_adjacent: if p > 0 { Some(lhs(1)?) } else { None },
                bound,
            },
        });
    }
    // edge_prob cannot fail on [0, p]
    let pred = |y: u64| lhs(y).expect("self-pairing in domain") <= bound;
    let value = match mode {
        SearchMode::Binary => max_satisfying(0, p, pred),
        SearchMode::Linear => max_satisfying_linear(0, p, pred),
    }
    .expect("ring size 0 has edge probability 0 <= bound");
    Ok(CapOutcome {
        value,
        negative_threshold: false,
        witness: SearchWitness {
            arg: value,
            lhs_at_arg: lhs(value)?,
            lhs_adjacent: if value < p { Some(lhs(value + 1)?) } else { None },
            bound,
        },
    })
}

/// Mean edge probability of the mixed vector
/// `[prefix[0..group], z, k[group+1..]]`, summed in group order.
///
/// For `group = 0` the first endpoint of every pairing is `z` itself. The
/// mixed vector equal to the original `k` reproduces `b_1` bit for bit,
/// which keeps the floor searches exact at the consistency boundary.
fn floor_lhs(p: u64, a: &[f64], k: &[u64], prefix: &[u64], group: usize, z: u64) -> Result<f64> {
    let mut v = Vec::with_capacity(k.len());
    v.extend_from_slice(prefix);
    v.push(z);
    v.extend_from_slice(&k[group + 1..]);
    mean_edge_prob_of(p, a, &v)
}

/// Outcome of one per-group floor search.
#[derive(Debug, Clone, Copy)]
pub struct FloorOutcome {
    /// Minimal satisfying ring size, or `P + 1` when the bound is
    /// unreachable.
    pub value: u64,
    pub infeasible: bool,
    pub witness: SearchWitness,
}

/// Minimal `Z` in `[0, P]` such that the mixed mean edge probability —
/// transformed ring sizes for groups before `group` (the `prefix`), `Z` for
/// `group`, original ring sizes after — reaches `(ln n + beta_tilde) / n`.
///
/// `group` is 0-based and `prefix.len()` must equal `group`. When no `Z` in
/// the domain reaches the bound, the sentinel `P + 1` is returned with
/// `infeasible` set.
pub fn min_group_ring(
    params: &ModelParams,
    prefix: &[u64],
    group: usize,
    beta_tilde: f64,
    mode: SearchMode,
) -> Result<FloorOutcome> {
    params.ensure_valid()?;
    if group >= params.m || prefix.len() != group {
        return Err(Error::CouplingInput(format!(
            "group index {group} needs a prefix of exactly {group} transformed ring sizes"
        )));
    }
    if let Some(&bad) = prefix.iter().find(|&&v| v > params.p) {
        return Err(Error::RingExceedsPool { pool: params.p, ring: bad });
    }
    let bound = ((params.n as f64).ln() + beta_tilde) / params.n as f64;
    floor_with_bound(params.p, &params.a, &params.k, prefix, group, bound, mode)
}

fn floor_with_bound(
    p: u64,
    a: &[f64],
    k: &[u64],
    prefix: &[u64],
    group: usize,
    bound: f64,
    mode: SearchMode,
) -> Result<FloorOutcome> {
    let lhs = |z: u64| floor_lhs(p, a, k, prefix, group, z);
    let pred = |z: u64| lhs(z).expect("mixed vector in domain") >= bound;
    let found = match mode {
        SearchMode::Binary => min_satisfying(0, p, pred),
        SearchMode::Linear => min_satisfying_linear(0, p, pred),
    };
    Ok(match found {
        Some(value) => FloorOutcome {
            value,
            infeasible: false,
            witness: SearchWitness {
                arg: value,
                lhs_at_arg: lhs(value)?,
                lhs_adjacent: if value > 0 { Some(lhs(value - 1)?) } else { None },
                bound,
            },
        },
        None => FloorOutcome {
            value: p + 1,
            infeasible: true,
            witness: SearchWitness { arg: p + 1, lhs_at_arg: lhs(p)?, lhs_adjacent: None, bound },
        },
    })
}

/// Mean edge probability of `k` with the last coordinate replaced by `x`.
/// For `m = 1` the single coordinate is both endpoints (self-pairing).
fn last_coord_lhs(params: &ModelParams, x: u64) -> Result<f64> {
    let mut v = params.k.clone();
    *v.last_mut().expect("m >= 1") = x;
    mean_edge_prob_of(params.p, &params.a, &v)
}

struct BetaSetup {
    b1: f64,
    beta_input: f64,
    beta_derived: f64,
    derived: bool,
}

fn beta_setup(params: &ModelParams, beta: Option<f64>) -> Result<BetaSetup> {
    let b1 = mean_edge_prob(params, 0)?;
    let beta_derived = beta_from_b1(params.n, b1);
    let (beta_input, derived) = match beta {
        None => (beta_derived, true),
        Some(b) => (b, false),
    };
    Ok(BetaSetup { b1, beta_input, beta_derived, derived })
}

/// The bound `(ln n + beta_tilde) / n`, except that a derived, unclamped
/// beta short-circuits to `b1` itself: the round trip through
/// `beta = n*b1 - ln n` is not exact in floating point, and searches whose
/// candidate vector reproduces the original one must see the original `b1`
/// on both sides of the comparison.
fn bound_for(params: &ModelParams, setup: &BetaSetup, beta_tilde: f64) -> f64 {
    if setup.derived && beta_tilde == setup.beta_input {
        setup.b1
    } else {
        ((params.n as f64).ln() + beta_tilde) / params.n as f64
    }
}

/// Supergraph transform: keeps every ring size except the last and grows
/// the last to the maximal value whose mean edge probability stays within
/// the clamped bound.
///
/// `beta = None` derives the deviation from the parameters; `Some(beta)` is
/// an explicit override (the result records whether it matches the
/// parameter-implied value and whether it lies in the transform's regime).
pub fn supergraph_coupling(params: &ModelParams, beta: Option<f64>) -> Result<CouplingResult> {
    supergraph_coupling_mode(params, beta, SearchMode::Binary)
}

/// As [`supergraph_coupling`] with an explicit [`SearchMode`].
pub fn supergraph_coupling_mode(
    params: &ModelParams,
    beta: Option<f64>,
    mode: SearchMode,
) -> Result<CouplingResult> {
    params.ensure_valid()?;
    require_n(params.n, 3)?;
    let setup = beta_setup(params, beta)?;
    let beta_tilde = beta_clamped_low(setup.beta_input, params.n)?;
    let bound = bound_for(params, &setup, beta_tilde);

    let pred = |x: u64| last_coord_lhs(params, x).expect("search domain is [0, P]") <= bound;
    if !pred(0) {
        return Err(Error::Infeasible(format!(
            "the ring sizes of groups 1..{} already push the mean edge probability past the bound {bound}",
            params.m - 1,
        )));
    }
    let k_m = match mode {
        SearchMode::Binary => max_satisfying(0, params.p, pred),
        SearchMode::Linear => max_satisfying_linear(0, params.p, pred),
    }
    .expect("predicate holds at 0");

    let mut k_out = params.k.clone();
    *k_out.last_mut().expect("m >= 1") = k_m;
    let beta_out = beta_from_b1(params.n, mean_edge_prob_of(params.p, &params.a, &k_out)?);
    let witness = SearchWitness {
        arg: k_m,
        lhs_at_arg: last_coord_lhs(params, k_m)?,
        lhs_adjacent: if k_m < params.p { Some(last_coord_lhs(params, k_m + 1)?) } else { None },
        bound,
    };

    let mut result = CouplingResult {
        direction: CouplingDirection::Supergraph,
        k_out,
        beta_input: setup.beta_input,
        beta_tilde,
        beta_out,
        bound,
        negative_threshold: bound < 0.0,
        t_n: None,
        ell: None,
        q: Vec::new(),
        stopped_early_at: None,
        t_n_witness: None,
        k_m_witness: Some(witness),
        beta_matches_params: (setup.beta_input - setup.beta_derived).abs() <= BETA_MATCH_TOL,
        in_regime: setup.beta_input <= -(params.n as f64).ln().ln(),
        checks: Vec::new(),
    };
    result.checks = verify_coupling(&result, params);
    Ok(result)
}

/// Subgraph transform: shrinks ring sizes toward the self-pairing cap,
/// giving each group above the cap either the cap itself or the minimal
/// ring size that restores the bound, and stopping at the first group that
/// needs more than the cap.
pub fn subgraph_coupling(params: &ModelParams, beta: Option<f64>) -> Result<CouplingResult> {
    subgraph_coupling_mode(params, beta, SearchMode::Binary)
}

/// As [`subgraph_coupling`] with an explicit [`SearchMode`].
pub fn subgraph_coupling_mode(
    params: &ModelParams,
    beta: Option<f64>,
    mode: SearchMode,
) -> Result<CouplingResult> {
    params.ensure_valid()?;
    require_n(params.n, 3)?;
    let setup = beta_setup(params, beta)?;
    let beta_tilde = beta_clamped_high(setup.beta_input, params.n)?;
    let bound = bound_for(params, &setup, beta_tilde);
    let cap = cap_with_bound(params.p, bound, mode)?;
    let t = cap.value;
    let m = params.m;

    let mut q = Vec::new();
    let mut ell = None;
    let mut stopped_early_at = None;
    let k_out = if params.k[0] >= t {
        vec![t; m]
    } else {
        // k[0] < t, so the last group at or below the cap exists
        let e = (0..m).rev().find(|&j| params.k[j] <= t).expect("k[0] <= cap");
        ell = Some(e + 1);
        let mut out: Vec<u64> = params.k[..=e].to_vec();
        for j in (e + 1)..m {
            let floor = floor_with_bound(params.p, &params.a, &params.k, &out, j, bound, mode)?;
            q.push(QEntry {
                group: j + 1,
                value: floor.value,
                infeasible: floor.infeasible,
                witness: floor.witness,
            });
            if floor.value > t {
                // an unreachable bound (sentinel P + 1) leaves the
                // coordinate unshrunk, flagged via `infeasible`
                out.push(if floor.infeasible { params.k[j] } else { floor.value });
                out.extend_from_slice(&params.k[j + 1..]);
                stopped_early_at = Some(j + 1);
                break;
            }
            out.push(t);
        }
        out
    };

    let beta_out = beta_from_b1(params.n, mean_edge_prob_of(params.p, &params.a, &k_out)?);
    let mut result = CouplingResult {
        direction: CouplingDirection::Subgraph,
        k_out,
        beta_input: setup.beta_input,
        beta_tilde,
        beta_out,
        bound,
        negative_threshold: cap.negative_threshold,
        t_n: Some(t),
        ell,
        q,
        stopped_early_at,
        t_n_witness: Some(cap.witness),
        k_m_witness: None,
        beta_matches_params: (setup.beta_input - setup.beta_derived).abs() <= BETA_MATCH_TOL,
        in_regime: setup.beta_input >= (params.n as f64).ln().ln(),
        checks: Vec::new(),
    };
    result.checks = verify_coupling(&result, params);
    Ok(result)
}

fn check(name: &str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome { name: name.to_string(), passed, detail }
}

/// Re-evaluates every invariant of a coupling result against the
/// parameters it was produced from. The constructors call this and store
/// the outcomes; calling it on a tampered result flips the corresponding
/// checks to failed.
pub fn verify_coupling(result: &CouplingResult, params: &ModelParams) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let m = params.m;
    let k = &params.k;
    let ko = &result.k_out;
    let bound = result.bound;
    let tol = CHECK_REL_TOL * bound.abs().max(1.0);

    out.push(check(
        "k_out_length",
        ko.len() == m,
        format!("|K_out|={} m={m}", ko.len()),
    ));
    if ko.len() != m {
        return out;
    }

    out.push(check(
        "k_out_nondecreasing",
        ko.windows(2).all(|w| w[0] <= w[1]),
        format!("K_out={ko:?}"),
    ));
    out.push(check(
        "k_out_within_pool",
        ko.iter().all(|&v| v <= params.p),
        format!("P={}", params.p),
    ));

    match result.direction {
        CouplingDirection::Supergraph => {
            let prefix_ok = ko[..m - 1] == k[..m - 1];
            out.push(check(
                "prefix_unchanged",
                prefix_ok,
                "ring sizes of groups 1..m-1 must be untouched".into(),
            ));
            out.push(check(
                "largest_ring_not_shrunk",
                ko[m - 1] >= k[m - 1],
                format!("K_out[m]={} K[m]={}", ko[m - 1], k[m - 1]),
            ));
            let at = last_coord_lhs(params, ko[m - 1]).unwrap_or(f64::NAN);
            let maximal_here = at <= bound;
            let adjacent_violates = if ko[m - 1] < params.p {
                last_coord_lhs(params, ko[m - 1] + 1).unwrap_or(f64::NAN) > bound
            } else {
                true
            };
            out.push(check(
                "largest_ring_maximal",
                maximal_here && adjacent_violates,
                format!("lhs(K_out[m])={at} bound={bound}"),
            ));
            // beta window: beta_tilde - delta < beta_out <= beta_tilde, with
            // delta the beta-space gap to the next larger vector
            let upper_ok = result.beta_out <= result.beta_tilde + BETA_WINDOW_TOL;
            let lower_ok = if ko[m - 1] < params.p {
                let b1_out = mean_edge_prob_of(params.p, &params.a, ko).unwrap_or(f64::NAN);
                let b1_next = last_coord_lhs(params, ko[m - 1] + 1).unwrap_or(f64::NAN);
                let delta = params.n as f64 * (b1_next - b1_out);
                result.beta_out > result.beta_tilde - delta - BETA_WINDOW_TOL
            } else {
                true
            };
            out.push(check(
                "beta_out_within_window",
                upper_ok && lower_ok,
                format!("beta_out={} beta_tilde={}", result.beta_out, result.beta_tilde),
            ));
        }
        CouplingDirection::Subgraph => {
            out.push(check(
                "k_out_le_original",
                (0..m).all(|j| ko[j] <= k[j]),
                format!("K_out={ko:?} K={k:?}"),
            ));
            let t = result.t_n.unwrap_or(0);
            if result.negative_threshold {
                out.push(check(
                    "cap_maximal",
                    true,
                    "skipped: negative bound, cap pinned at 0".into(),
                ));
            } else {
                let at = edge_prob(params.p, t, t).unwrap_or(f64::NAN);
                let next = if t < params.p {
                    edge_prob(params.p, t + 1, t + 1).unwrap_or(f64::NAN) > bound
                } else {
                    true
                };
                out.push(check(
                    "cap_maximal",
                    at <= bound && next,
                    format!("lhs(T_n)={at} bound={bound}"),
                ));
            }
            let mut any_infeasible = false;
            for entry in &result.q {
                let j = entry.group - 1;
                let prefix = &ko[..j];
                let name = format!("floor_minimal_group_{}", entry.group);
                if entry.infeasible {
                    any_infeasible = true;
                    let at_p = floor_lhs(params.p, &params.a, k, prefix, j, params.p)
                        .unwrap_or(f64::NAN);
                    out.push(check(
                        &name,
                        at_p < bound && entry.value == params.p + 1,
                        format!("bound unreachable: lhs(P)={at_p} bound={bound}"),
                    ));
                    continue;
                }
                let at = floor_lhs(params.p, &params.a, k, prefix, j, entry.value)
                    .unwrap_or(f64::NAN);
                let prev_violates = if entry.value > 0 {
                    floor_lhs(params.p, &params.a, k, prefix, j, entry.value - 1)
                        .unwrap_or(f64::NAN)
                        < bound
                } else {
                    true
                };
                out.push(check(
                    &name,
                    at >= bound && prev_violates,
                    format!("lhs(Q)={at} bound={bound}"),
                ));
            }
            // Where the walk stopped, the transformed vector sits on the
            // correct side of the bound: at or below it on the all-cap
            // branch, at or above it otherwise.
            let b1_out = mean_edge_prob_of(params.p, &params.a, ko).unwrap_or(f64::NAN);
            if any_infeasible || result.negative_threshold {
                out.push(check(
                    "b1_vs_bound_at_stop",
                    true,
                    "skipped: bound unreachable in the domain".into(),
                ));
            } else if result.ell.is_none() {
                out.push(check(
                    "b1_vs_bound_at_stop",
                    b1_out <= bound + tol,
                    format!("all-cap branch: b1(K_out)={b1_out} bound={bound}"),
                ));
            } else {
                out.push(check(
                    "b1_vs_bound_at_stop",
                    b1_out >= bound - tol,
                    format!("mixed branch: b1(K_out)={b1_out} bound={bound}"),
                ));
            }
        }
    }

    let beta_recomputed = mean_edge_prob_of(params.p, &params.a, ko)
        .map(|b1| beta_from_b1(params.n, b1))
        .unwrap_or(f64::NAN);
    out.push(check(
        "beta_out_consistent",
        (result.beta_out - beta_recomputed).abs() <= 1e-12 * beta_recomputed.abs().max(1.0),
        format!("stored={} recomputed={beta_recomputed}", result.beta_out),
    ));
    out
}
