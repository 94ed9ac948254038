use thiserror::Error;

use crate::marginalize::NodeSet;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors reported by network validation and by the information measures.
///
/// Node ids in messages are 1-based, matching the declaration order of the
/// network.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("network has no nodes")]
    EmptyNetwork,

    #[error("node {node}: duplicate node id")]
    DuplicateNode { node: usize },

    #[error("node {node}: no law declared for this node id")]
    MissingNode { node: usize },

    #[error("node {node}: input {input} does not reference an existing node")]
    DanglingInput { node: usize, input: usize },

    #[error("node {node}: table has {found} entries, expected 2^{inputs} = {expected}")]
    TableLength {
        node: usize,
        inputs: usize,
        found: usize,
        expected: usize,
    },

    #[error("node {node}: table[{index}] = {value} is outside [0, 1]")]
    ProbabilityOutOfRange {
        node: usize,
        index: usize,
        value: f64,
    },

    #[error("network has {nodes} nodes, the configured limit is {limit}")]
    SizeCap { nodes: usize, limit: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("instant must be at least {min}, got {found}")]
    InvalidInstant { min: usize, found: usize },

    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),

    #[error("stationary iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("absolute continuity violated at index {index}: p = {p} but q = 0")]
    AbsoluteContinuity { index: usize, p: f64 },

    #[error("state {state} of subset {subset} has zero probability at instant {time}")]
    Unobservable {
        subset: NodeSet,
        state: usize,
        time: usize,
    },

    #[error("state {state} has zero stationary probability")]
    UnobservableStationary { state: usize },

    #[error("state {state} is out of range for {nodes} nodes")]
    StateOutOfRange { state: usize, nodes: usize },

    #[error("node subset is empty")]
    EmptySubset,

    #[error("subset {subset} references nodes outside a network of {nodes} nodes")]
    SubsetOutOfRange { subset: NodeSet, nodes: usize },

    #[error("subset {subset} needs at least two nodes")]
    SubsetTooSmall { subset: NodeSet },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("exhaustive partitions are limited to subsets of at most {limit} nodes, {subset} has {size}")]
    PartitionCap {
        subset: NodeSet,
        size: usize,
        limit: usize,
    },

    #[error("subset scans are limited to networks of at most {limit} nodes, got {nodes}")]
    ScanCap { nodes: usize, limit: usize },

    #[error("every partition of {subset} has zero normalization and nonzero phi")]
    AllPartitionsExcluded { subset: NodeSet },

    #[error("oracle enumeration of 2^{bits} trajectories exceeds the cap of 2^{limit}")]
    OracleCap { bits: usize, limit: usize },
}

impl Error {
    /// True for errors caused by a size limit rather than by the input itself.
    pub fn is_size_cap(&self) -> bool {
        matches!(
            self,
            Error::SizeCap { .. }
                | Error::PartitionCap { .. }
                | Error::ScanCap { .. }
                | Error::OracleCap { .. }
        )
    }

    /// True for errors raised while validating a network definition.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::EmptyNetwork
                | Error::DuplicateNode { .. }
                | Error::MissingNode { .. }
                | Error::DanglingInput { .. }
                | Error::TableLength { .. }
                | Error::ProbabilityOutOfRange { .. }
        )
    }
}
