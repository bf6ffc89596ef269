//! Monte Carlo harness: repeated trials per parameter set, parameter
//! sweeps, the analytic threshold finder, and CSV/gnuplot output.
//!
//! Determinism contract: trial `t` of a run with master seed `s` always
//! draws from `derive_stream(RngSeed::new(s), t)`, grid point `g` of a sweep
//! runs with the derived master `derive_stream(RngSeed::new(s), g).stream_id`,
//! and aggregation is pure integer counting. Re-running a sweep reproduces
//! its CSV byte for byte, trials may be evaluated in any order, and adding
//! grid points never perturbs existing rows.

use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

use crate::exact::{beta_from_b1, mean_edge_prob};
use crate::graph::components;
use crate::model::{derive_stream, ModelParams, RngSeed};
use crate::sampler::sample_graph;
use crate::search::{max_satisfying, min_satisfying};
use crate::{Error, Result};

/// Search cap for unbounded threshold searches (`P` upward, `n` upward);
/// beyond this, integer values are no longer exact in `f64` anyway.
const SEARCH_CAP: u64 = 1 << 53;

/// Which parameter a sweep or threshold search varies. Indices are 0-based
/// in code; the text form uses the 1-based group numbering (`K2`, `a1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VaryField {
    N,
    P,
    GroupProb(usize),
    RingSize(usize),
}

impl fmt::Display for VaryField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VaryField::N => write!(f, "n"),
            VaryField::P => write!(f, "P"),
            VaryField::GroupProb(t) => write!(f, "a{}", t + 1),
            VaryField::RingSize(j) => write!(f, "K{}", j + 1),
        }
    }
}

impl FromStr for VaryField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n" => return Ok(VaryField::N),
            "P" => return Ok(VaryField::P),
            _ => {}
        }
        let bad = || Error::Parse(format!("bad vary field {s:?}: expected n, P, a<i>, or K<j>"));
        let (kind, idx) = s.split_at(1);
        let idx: usize = idx.parse().map_err(|_| bad())?;
        if idx == 0 {
            return Err(bad());
        }
        match kind {
            "a" => Ok(VaryField::GroupProb(idx - 1)),
            "K" => Ok(VaryField::RingSize(idx - 1)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for VaryField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Which optional statistics a run records. Connectivity itself is the core
/// output and is always recorded; the component summary yields the rest for
/// free, so the flags only gate reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecordFlags {
    pub connectivity: bool,
    pub isolated_counts: bool,
    pub component_count: bool,
}

impl Default for RecordFlags {
    fn default() -> Self {
        RecordFlags { connectivity: true, isolated_counts: true, component_count: false }
    }
}

/// One sweep: a base law, the field to vary, its grid, and the trial budget
/// per grid point.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub base: ModelParams,
    pub vary: VaryField,
    pub values: Vec<f64>,
    pub trials: u64,
    pub master_seed: u64,
    pub record: RecordFlags,
}

/// Aggregated outcome of the trials at one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialAggregate {
    /// Grid value within a sweep; absent for standalone runs.
    pub param_value: Option<f64>,
    pub connected_count: u64,
    pub trials: u64,
    pub connected_prob: f64,
    /// 95% Wilson score interval for the connectivity probability.
    pub ci_low: f64,
    pub ci_high: f64,
    /// Mean isolated-node count, when recorded.
    #[serde(rename = "mean_Jn")]
    pub mean_isolated: Option<f64>,
    /// Mean group-1 isolated-node count, when recorded.
    #[serde(rename = "mean_In")]
    pub mean_isolated_group1: Option<f64>,
    /// Mean component count; only serialized when recorded.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_components: Option<f64>,
    /// Analytic `b_1` of the parameter set.
    pub b1: f64,
    /// Analytic deviation `n * b1 - ln n`.
    pub beta_n: f64,
    /// `b1 >= ln n / n`.
    pub threshold_flag: bool,
}

#[derive(Default, Clone, Copy)]
struct Counts {
    connected: u64,
    isolated: u64,
    isolated_group1: u64,
    comps: u64,
}

impl Counts {
    fn merge(self, other: Counts) -> Counts {
        Counts {
            connected: self.connected + other.connected,
            isolated: self.isolated + other.isolated,
            isolated_group1: self.isolated_group1 + other.isolated_group1,
            comps: self.comps + other.comps,
        }
    }
}

fn trial_counts(params: &ModelParams, seed: &RngSeed) -> Counts {
    let sample = sample_graph(params, seed).expect("parameters validated before the run");
    let summary = components(&sample);
    Counts {
        connected: summary.is_connected as u64,
        isolated: summary.isolated as u64,
        isolated_group1: summary.isolated_group1 as u64,
        comps: summary.num_components as u64,
    }
}

/// Runs `trials` independent samples of the law and aggregates connectivity
/// and isolated-node counts. Deterministic in `(params, trials, master_seed)`
/// and independent of evaluation order: trial `t` uses the stream
/// `derive_stream(RngSeed::new(master_seed), t)` and aggregation is pure
/// counting.
pub fn run_trials(params: &ModelParams, trials: u64, master_seed: u64) -> Result<TrialAggregate> {
    run_trials_recording(params, trials, master_seed, RecordFlags::default())
}

/// As [`run_trials`] with explicit [`RecordFlags`].
pub fn run_trials_recording(
    params: &ModelParams,
    trials: u64,
    master_seed: u64,
    record: RecordFlags,
) -> Result<TrialAggregate> {
    params.ensure_valid()?;
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    let base = RngSeed::new(master_seed);
    let counts = (0..trials)
        .into_par_iter()
        .map(|t| trial_counts(params, &derive_stream(base, t)))
        .reduce(Counts::default, Counts::merge);
    aggregate(params, trials, counts, record, None)
}

fn aggregate(
    params: &ModelParams,
    trials: u64,
    counts: Counts,
    record: RecordFlags,
    param_value: Option<f64>,
) -> Result<TrialAggregate> {
    let b1 = mean_edge_prob(params, 0)?;
    let n = params.n;
    let (ci_low, ci_high) = wilson_interval(counts.connected, trials, 1.96);
    let per_trial = |sum: u64| sum as f64 / trials as f64;
    Ok(TrialAggregate {
        param_value,
        connected_count: counts.connected,
        trials,
        connected_prob: per_trial(counts.connected),
        ci_low,
        ci_high,
        mean_isolated: record.isolated_counts.then(|| per_trial(counts.isolated)),
        mean_isolated_group1: record.isolated_counts.then(|| per_trial(counts.isolated_group1)),
        mean_components: record.component_count.then(|| per_trial(counts.comps)),
        b1,
        beta_n: beta_from_b1(n, b1),
        threshold_flag: b1 >= (n as f64).ln() / n as f64,
    })
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub outcome: SweepOutcome,
}

/// A grid point either aggregates normally or is marked invalid (with the
/// validation report as the reason) without stopping the sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SweepOutcome {
    Valid { params: ModelParams, aggregate: TrialAggregate },
    Invalid { reason: String },
}

/// Substitutes one grid value into the base parameters.
///
/// Integer fields require integral grid values. Varying a group probability
/// `a_t` sets it to the grid value and rescales the remaining entries
/// proportionally so the vector still sums to 1 (for `m = 2` this is the
/// usual `[1 - t, t]` family).
pub fn apply_vary(
    base: &ModelParams,
    vary: VaryField,
    value: f64,
) -> std::result::Result<ModelParams, String> {
    let mut params = base.clone();
    let as_int = |v: f64| -> std::result::Result<u64, String> {
        if v.fract() != 0.0 || v < 0.0 || v > SEARCH_CAP as f64 {
            return Err(format!("value {v} is not representable as a nonnegative integer"));
        }
        Ok(v as u64)
    };
    match vary {
        VaryField::N => params.n = as_int(value)?,
        VaryField::P => params.p = as_int(value)?,
        VaryField::RingSize(j) => {
            if j >= params.m {
                return Err(format!("K{} does not exist (m={})", j + 1, params.m));
            }
            params.k[j] = as_int(value)?;
        }
        VaryField::GroupProb(t) => {
            if t >= params.m {
                return Err(format!("a{} does not exist (m={})", t + 1, params.m));
            }
            if !(value > 0.0 && value < 1.0) {
                return Err(format!("a{} must lie strictly between 0 and 1, got {value}", t + 1));
            }
            let rest: f64 = params.a.iter().enumerate().filter(|&(i, _)| i != t).map(|(_, v)| v).sum();
            if rest <= 0.0 {
                return Err("remaining group probabilities sum to 0; cannot rescale".into());
            }
            let scale = (1.0 - value) / rest;
            for (i, ai) in params.a.iter_mut().enumerate() {
                if i == t {
                    *ai = value;
                } else {
                    *ai *= scale;
                }
            }
        }
    }
    let report = crate::model::validate(&params);
    if report.ok() {
        Ok(params)
    } else {
        Err(report.to_string())
    }
}

/// Runs the grid in order. Grid point `g` derives its own master seed from
/// `(master_seed, g)`, so extending the grid never changes existing rows.
/// Invalid grid points produce `SweepOutcome::Invalid` rows and the sweep
/// continues.
pub fn sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    if config.trials == 0 {
        return Err(Error::ZeroTrials);
    }
    let root = RngSeed::new(config.master_seed);
    let mut rows = Vec::with_capacity(config.values.len());
    for (g, &value) in config.values.iter().enumerate() {
        let outcome = match apply_vary(&config.base, config.vary, value) {
            Err(reason) => SweepOutcome::Invalid { reason },
            Ok(params) => {
                let grid_master = derive_stream(root, g as u64).stream_id;
                let mut aggregate =
                    run_trials_recording(&params, config.trials, grid_master, config.record)?;
                aggregate.param_value = Some(value);
                SweepOutcome::Valid { params, aggregate }
            }
        };
        rows.push(SweepRow { value, outcome });
    }
    Ok(rows)
}

/// Direction of a threshold search: the minimal or the maximal field value
/// satisfying `b_1 >= ln n / n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdDirection {
    Min,
    Max,
}

impl FromStr for ThresholdDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(ThresholdDirection::Min),
            "max" => Ok(ThresholdDirection::Max),
            _ => Err(Error::Parse(format!("bad direction {s:?}: expected min or max"))),
        }
    }
}

fn b1_with(base: &ModelParams, vary: VaryField, value: u64) -> f64 {
    let mut params = base.clone();
    match vary {
        VaryField::P => params.p = value,
        VaryField::RingSize(j) => params.k[j] = value,
        // b1 does not depend on n; N searches vary only the bound
        VaryField::N | VaryField::GroupProb(_) => {}
    }
    mean_edge_prob(&params, 0).expect("search domains keep parameters valid")
}

/// Finds the boundary field value where `b_1` crosses `ln n / n`:
///
/// - `K_j` with `Min`: minimal ring size (within the sortedness-preserving
///   interval) reaching the bound; `b_1` is nondecreasing in `K_j`.
/// - `P` with `Max`: maximal pool size keeping the bound; `b_1` is
///   nonincreasing in `P`.
/// - `n` with `Min`: minimal node count whose bound `ln n / n` has fallen to
///   `b_1`; handled separately at `n = 2` where `ln n / n` is not yet
///   monotone.
///
/// Varying a group probability is not supported here (the grid is not
/// integer); sweeps cover it. Reports out-of-range when the crossing does
/// not exist in the domain.
pub fn find_threshold(
    base: &ModelParams,
    vary: VaryField,
    direction: ThresholdDirection,
) -> Result<u64> {
    base.ensure_valid()?;
    let n = base.n;
    let bound = (n as f64).ln() / n as f64;
    match (vary, direction) {
        (VaryField::RingSize(j), ThresholdDirection::Min) => {
            if j >= base.m {
                return Err(Error::Unsupported(format!("K{} does not exist", j + 1)));
            }
            let lo = if j == 0 { 1 } else { base.k[j - 1] };
            let hi = if j == base.m - 1 { base.p } else { base.k[j + 1] };
            min_satisfying(lo, hi, |v| b1_with(base, vary, v) >= bound).ok_or_else(|| {
                Error::ThresholdOutOfRange(format!(
                    "no K{} in [{lo}, {hi}] reaches b1 >= ln n / n",
                    j + 1
                ))
            })
        }
        (VaryField::P, ThresholdDirection::Max) => {
            let lo = *base.k.last().expect("m >= 1");
            let pred = |v: u64| b1_with(base, vary, v) >= bound;
            if !pred(lo) {
                return Err(Error::ThresholdOutOfRange(format!(
                    "even the minimal admissible pool P={lo} misses the bound"
                )));
            }
            let mut hi = lo.max(1);
            while pred(hi) {
                if hi >= SEARCH_CAP {
                    return Err(Error::ThresholdOutOfRange(
                        "bound still satisfied at the pool-size search cap".into(),
                    ));
                }
                hi = (hi.saturating_mul(2)).min(SEARCH_CAP);
            }
            Ok(max_satisfying(lo, hi, pred).expect("predicate holds at lo"))
        }
        (VaryField::N, ThresholdDirection::Min) => {
            let b1 = mean_edge_prob(base, 0)?;
            let thr = |v: u64| (v as f64).ln() / v as f64;
            if b1 >= thr(2) {
                return Ok(2);
            }
            // ln v / v is decreasing for v >= 3, so the satisfying set is an
            // up-set there
            let pred = |v: u64| b1 >= thr(v);
            let mut hi = 3u64;
            while !pred(hi) {
                if hi >= SEARCH_CAP {
                    return Err(Error::ThresholdOutOfRange(
                        "bound not reached at the node-count search cap".into(),
                    ));
                }
                hi = (hi.saturating_mul(2)).min(SEARCH_CAP);
            }
            Ok(min_satisfying(3, hi, pred).expect("predicate holds at hi"))
        }
        (VaryField::GroupProb(_), _) => Err(Error::Unsupported(
            "threshold search over a group probability is not supported; use a sweep".into(),
        )),
        (v, d) => Err(Error::Unsupported(format!(
            "threshold search over {v} only supports direction {}",
            match d {
                ThresholdDirection::Min => "max",
                ThresholdDirection::Max => "min",
            }
        ))),
    }
}

/// Wilson score interval for a binomial proportion.
///
/// The endpoints are exact 0 and 1 at zero and full success counts, and the
/// interval always brackets the empirical proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    assert!(trials >= 1, "wilson_interval needs at least one trial");
    assert!(successes <= trials, "successes cannot exceed trials");
    let n = trials as f64;
    let p_hat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p_hat + z2 / (2.0 * n)) / denom;
    let half = z * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let low = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (low, high)
}

/// CSV schema of a sweep. UTF-8, `\n` line endings, header mandatory.
pub const SWEEP_CSV_HEADER: &str = "vary,param_value,n,m,P,a,K,trials,connected_count,\
connected_prob,ci_low,ci_high,mean_Jn,mean_In,b1,beta_n,threshold_flag";

/// Renders sweep rows as CSV under [`SWEEP_CSV_HEADER`]. `a` and `K` are
/// `;`-separated within their cells. Invalid rows carry no statistics and
/// are omitted; callers that care report them from the row list.
pub fn sweep_csv(rows: &[SweepRow], vary: VaryField) -> String {
    let mut out = String::new();
    out.push_str(SWEEP_CSV_HEADER);
    out.push('\n');
    for row in rows {
        let (params, agg) = match &row.outcome {
            SweepOutcome::Valid { params, aggregate } => (params, aggregate),
            SweepOutcome::Invalid { .. } => continue,
        };
        let a: Vec<String> = params.a.iter().map(f64::to_string).collect();
        let k: Vec<String> = params.k.iter().map(u64::to_string).collect();
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            vary,
            row.value,
            params.n,
            params.m,
            params.p,
            a.join(";"),
            k.join(";"),
            agg.trials,
            agg.connected_count,
            agg.connected_prob,
            agg.ci_low,
            agg.ci_high,
            opt(agg.mean_isolated),
            opt(agg.mean_isolated_group1),
            agg.b1,
            agg.beta_n,
            agg.threshold_flag,
        ));
    }
    out
}

/// Emits a self-contained gnuplot script that plots the connectivity
/// probability (with Wilson error bars) of a sweep CSV, plus a vertical
/// marker at the analytic threshold when one is supplied.
pub fn gnuplot_script(csv_path: &str, vary: VaryField, threshold: Option<f64>) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str(&format!("set xlabel '{vary}'\n"));
    s.push_str("set ylabel 'empirical P[connected]'\n");
    s.push_str("set yrange [-0.05:1.05]\n");
    s.push_str("set key left top\n");
    if let Some(t) = threshold {
        s.push_str(&format!(
            "set arrow from {t}, graph 0 to {t}, graph 1 nohead dashtype 2 lc rgb 'gray40'\n"
        ));
        s.push_str(&format!("set label 'b1 = ln(n)/n' at {t}, graph 0.5 rotate by 90 offset char -1,0\n"));
    }
    s.push_str(&format!(
        "plot '{csv_path}' using 2:10:11:12 skip 1 with yerrorbars title 'trials', \\\n     '{csv_path}' using 2:10 skip 1 with lines notitle\n"
    ));
    s
}
