//! Domain types, parameter validation, and deterministic RNG stream
//! derivation shared by all other modules.
//!
//! All types here are immutable values after construction and safe to share
//! across threads. Randomness is always derived from an explicit [`RngSeed`],
//! never from shared mutable state.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::{Error, Result};

/// Tolerance on `|sum(a) - 1|`. Group probabilities are user-entered
/// decimals, not computed quantities, so a tight absolute tolerance is
/// appropriate.
pub const PROB_SUM_TOL: f64 = 1e-9;

/// Parameters `(n, m, P, a, K)` of one heterogeneous random key graph law.
///
/// Group indices are 0-based in code and 1-based in every report and file
/// format, matching the usual mathematical numbering of the groups. Key ids
/// are dense integers in `[0, P)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "ParamsWire")]
pub struct ModelParams {
    /// Node count, at least 2.
    pub n: u64,
    /// Group count, equal to `a.len()` and `k.len()`.
    pub m: usize,
    /// Key pool size.
    #[serde(rename = "P")]
    pub p: u64,
    /// Group probabilities; positive, summing to 1.
    pub a: Vec<f64>,
    /// Ring size per group, nondecreasing, each in `[1, P]`.
    #[serde(rename = "K")]
    pub k: Vec<u64>,
}

/// Wire form for deserialization: `m` may be omitted and is then inferred.
#[derive(Deserialize)]
struct ParamsWire {
    n: u64,
    #[serde(default)]
    m: Option<usize>,
    #[serde(rename = "P")]
    p: u64,
    a: Vec<f64>,
    #[serde(rename = "K")]
    k: Vec<u64>,
}

impl From<ParamsWire> for ModelParams {
    fn from(w: ParamsWire) -> Self {
        let m = w.m.unwrap_or(w.a.len());
        ModelParams { n: w.n, m, p: w.p, a: w.a, k: w.k }
    }
}

impl ModelParams {
    /// Builds parameters with `m` inferred from the vector lengths.
    pub fn new(n: u64, p: u64, a: Vec<f64>, k: Vec<u64>) -> Self {
        let m = a.len();
        ModelParams { n, m, p, a, k }
    }

    /// Returns `Err(Error::InvalidParams)` unless every invariant holds.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = validate(self);
        if report.ok() {
            Ok(())
        } else {
            Err(Error::InvalidParams(report))
        }
    }

    /// Parses the flat key-value config format:
    ///
    /// ```text
    /// n = 2000
    /// P = 20000
    /// a = 0.5,0.5
    /// K = 20,40
    /// ```
    ///
    /// `m` is optional; `#` starts a comment.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut n = None;
        let mut m = None;
        let mut p = None;
        let mut a = None;
        let mut k = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| Error::Parse(format!("line {}: bad {what}: {value}", lineno + 1));
            match key {
                "n" => n = Some(value.parse::<u64>().map_err(|_| bad("n"))?),
                "m" => m = Some(value.parse::<usize>().map_err(|_| bad("m"))?),
                "P" => p = Some(value.parse::<u64>().map_err(|_| bad("P"))?),
                "a" => {
                    let parsed: std::result::Result<Vec<f64>, _> =
                        value.split(',').map(|t| t.trim().parse::<f64>()).collect();
                    a = Some(parsed.map_err(|_| bad("a"))?);
                }
                "K" => {
                    let parsed: std::result::Result<Vec<u64>, _> =
                        value.split(',').map(|t| t.trim().parse::<u64>()).collect();
                    k = Some(parsed.map_err(|_| bad("K"))?);
                }
                other => return Err(Error::Parse(format!("line {}: unknown key {other}", lineno + 1))),
            }
        }
        let missing = |what: &str| Error::Parse(format!("missing key {what}"));
        let a = a.ok_or_else(|| missing("a"))?;
        let m = m.unwrap_or(a.len());
        Ok(ModelParams {
            n: n.ok_or_else(|| missing("n"))?,
            m,
            p: p.ok_or_else(|| missing("P"))?,
            a,
            k: k.ok_or_else(|| missing("K"))?,
        })
    }

    /// Serializes to the flat key-value config format accepted by
    /// [`ModelParams::from_kv`].
    pub fn to_kv(&self) -> String {
        let a: Vec<String> = self.a.iter().map(|v| v.to_string()).collect();
        let k: Vec<String> = self.k.iter().map(|v| v.to_string()).collect();
        format!(
            "n = {}\nm = {}\nP = {}\na = {}\nK = {}\n",
            self.n,
            self.m,
            self.p,
            a.join(","),
            k.join(",")
        )
    }
}

/// One violated invariant; indices in messages are 1-based like the reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    NTooSmall { n: u64 },
    MZero,
    PZero,
    LengthMismatch { m: usize, a_len: usize, k_len: usize },
    GroupProbNotPositive { index: usize, value: f64 },
    GroupProbSum { sum: f64 },
    RingZero { index: usize },
    RingExceedsPool { index: usize, ring: u64, pool: u64 },
    KNotSorted { index: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NTooSmall { n } => write!(f, "n must be at least 2 (got {n})"),
            Violation::MZero => write!(f, "m must be at least 1"),
            Violation::PZero => write!(f, "P must be at least 1"),
            Violation::LengthMismatch { m, a_len, k_len } => {
                write!(f, "a and K must both have m entries (m={m}, |a|={a_len}, |K|={k_len})")
            }
            Violation::GroupProbNotPositive { index, value } => {
                write!(f, "a[{index}] must be positive (got {value})")
            }
            Violation::GroupProbSum { sum } => write!(f, "a does not sum to 1 (sum={sum})"),
            Violation::RingZero { index } => write!(f, "K[{index}] must be at least 1"),
            Violation::RingExceedsPool { index, ring, pool } => {
                write!(f, "K[{index}]={ring} exceeds pool size P={pool}")
            }
            Violation::KNotSorted { index } => write!(f, "K not sorted at position {index}"),
        }
    }
}

/// Outcome of [`validate`]: empty means every invariant holds.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            return write!(f, "ok");
        }
        let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", msgs.join("; "))
    }
}

/// Checks every `ModelParams` invariant and reports all violations with the
/// offending (1-based) index. Idempotent and side-effect free.
pub fn validate(params: &ModelParams) -> ValidationReport {
    let mut v = Vec::new();
    if params.n < 2 {
        v.push(Violation::NTooSmall { n: params.n });
    }
    if params.m == 0 {
        v.push(Violation::MZero);
    }
    if params.p == 0 {
        v.push(Violation::PZero);
    }
    if params.a.len() != params.m || params.k.len() != params.m {
        v.push(Violation::LengthMismatch {
            m: params.m,
            a_len: params.a.len(),
            k_len: params.k.len(),
        });
    }
    for (i, &ai) in params.a.iter().enumerate() {
        if !(ai > 0.0) {
            v.push(Violation::GroupProbNotPositive { index: i + 1, value: ai });
        }
    }
    if !params.a.is_empty() {
        let sum: f64 = params.a.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            v.push(Violation::GroupProbSum { sum });
        }
    }
    for (i, &ki) in params.k.iter().enumerate() {
        if ki == 0 {
            v.push(Violation::RingZero { index: i + 1 });
        } else if ki > params.p {
            v.push(Violation::RingExceedsPool { index: i + 1, ring: ki, pool: params.p });
        }
    }
    for i in 1..params.k.len() {
        if params.k[i - 1] > params.k[i] {
            v.push(Violation::KNotSorted { index: i + 1 });
        }
    }
    ValidationReport { violations: v }
}

/// Seed of one reproducible random stream.
///
/// Identical `(master_seed, stream_id)` pairs always produce identical byte
/// streams; independent trials get disjoint streams via [`derive_stream`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngSeed {
    /// The root stream of a master seed (`stream_id = 0`).
    pub fn new(master_seed: u64) -> Self {
        RngSeed { master_seed, stream_id: 0 }
    }

    /// Instantiates the generator for this stream.
    ///
    /// The 32-byte ChaCha8 key is filled from four iterates of
    /// [`split_mix64`] starting at `master_seed ^ split_mix64(stream_id)`,
    /// each written in little-endian byte order.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut z = self.master_seed ^ split_mix64(self.stream_id);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            z = split_mix64(z);
            chunk.copy_from_slice(&z.to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }
}

/// The SplitMix64 step: add the golden-ratio increment, then finalize with
/// two xor-shift-multiply rounds. A bijection on `u64`.
///
/// ```text
/// z += 0x9E3779B97F4A7C15
/// z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
/// z = (z ^ (z >> 27)) * 0x94D049BB133111EB
/// z ^ (z >> 31)
/// ```
pub fn split_mix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the stream for one trial:
/// `stream_id' = split_mix64(stream_id ^ split_mix64(trial_index))`.
///
/// Both composed maps are bijections on `u64`, so for a fixed parent stream
/// the mapping `trial_index -> stream_id'` is injective: independent trials
/// never share a stream.
pub fn derive_stream(seed: RngSeed, trial_index: u64) -> RngSeed {
    RngSeed {
        master_seed: seed.master_seed,
        stream_id: split_mix64(seed.stream_id ^ split_mix64(trial_index)),
    }
}

/// One realization of the law: a group per node plus a sorted key ring per
/// node. Rings hold distinct ids in `[0, P)`, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSample {
    /// 0-based group index per node.
    pub groups: Vec<u32>,
    /// Sorted distinct key ids per node.
    pub rings: Vec<Vec<u64>>,
}

impl GraphSample {
    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}
