//! Heterogeneous random key graphs.
//!
//! A node population of size `n` is split into `m` groups; a node lands in
//! group `i` with probability `a_i` and then draws `K_i` distinct keys
//! uniformly at random from a pool of `P` keys. Two nodes are adjacent
//! exactly when their key rings share at least one key.
//!
//! The crate provides:
//!
//! - [`model`]: parameter types, validation, and deterministic RNG stream
//!   derivation,
//! - [`exact`]: closed-form edge probabilities, the mean edge probability
//!   `b_i`, and the connectivity deviation `beta_n` defined through
//!   `b_1 = (ln n + beta_n) / n`,
//! - [`sampler`]: graph realizations, including coupled pairs where one
//!   realization is a spanning subgraph of the other,
//! - [`graph`]: connectivity, component structure, and isolated-node counts,
//! - [`coupling`]: the supergraph/subgraph ring-size transforms together
//!   with runtime verification of their invariants,
//! - [`experiment`]: a Monte Carlo harness with parameter sweeps, Wilson
//!   intervals, CSV output, and an analytic threshold finder.

pub mod coupling;
pub mod exact;
pub mod experiment;
pub mod graph;
pub mod model;
pub mod sampler;

mod search;

pub use coupling::{
    subgraph_coupling, supergraph_coupling, verify_coupling, CheckOutcome, CouplingDirection,
    CouplingResult, SearchMode,
};
pub use exact::{
    beta_from_b1, beta_from_params, edge_prob, mean_edge_prob, scaling_report, ConditionFlags,
    ScalingReport,
};
pub use experiment::{
    find_threshold, run_trials, sweep, wilson_interval, RecordFlags, SweepConfig, SweepOutcome,
    SweepRow, ThresholdDirection, TrialAggregate, VaryField,
};
pub use graph::{components, isolated_nodes, naive_components, ComponentSummary};
pub use model::{derive_stream, validate, GraphSample, ModelParams, RngSeed, ValidationReport};
pub use sampler::{coupled_sample, sample_graph};

use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Parameter validation failed; the report lists every violation.
    #[error("invalid parameters: {0}")]
    InvalidParams(ValidationReport),

    /// A binomial-coefficient argument exceeds the pool size.
    #[error("binomial domain error: subset size {subset} exceeds pool size {pool}")]
    Binomial { pool: u64, subset: u64 },

    /// A requested key ring is larger than the key pool.
    #[error("ring size {ring} exceeds pool size {pool}")]
    RingExceedsPool { pool: u64, ring: u64 },

    /// Coupled sampling requires matching `n`, `m`, `a`, `P` and
    /// coordinatewise-ordered ring sizes.
    #[error("coupled sampling rejected: {0}")]
    CouplingInput(String),

    /// The pairwise connectivity oracle refuses instances above its cap.
    #[error("naive component oracle supports at most {cap} nodes, got {n}")]
    NaiveCap { n: usize, cap: usize },

    /// The operation needs a larger node count.
    #[error("n must be at least {min} for this operation, got {n}")]
    SmallN { n: u64, min: u64 },

    /// A coupling search has no feasible value in its domain.
    #[error("coupling search infeasible: {0}")]
    Infeasible(String),

    /// No threshold crossing exists within the search domain.
    #[error("threshold search out of range: {0}")]
    ThresholdOutOfRange(String),

    /// The requested field/direction combination is not supported.
    #[error("unsupported request: {0}")]
    Unsupported(String),

    /// Text-format parsing failed (key-value config or sample file).
    #[error("parse error: {0}")]
    Parse(String),

    /// Trial counts must be positive.
    #[error("trial count must be at least 1")]
    ZeroTrials,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
