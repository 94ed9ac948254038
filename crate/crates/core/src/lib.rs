//! Effective information and integrated information (φ) over probabilistic
//! boolean networks, computed exactly on the finite Markov chain the network
//! defines.
//!
//! The pieces, bottom-up:
//!
//! - [`network`]: node laws, validation and the state encoding.
//! - [`dynamics`]: transition matrix, forward evolution, stationary
//!   distributions and Bayes-inverted backward matrices.
//! - [`marginalize`]: projections of states, distributions and dynamics onto
//!   node subsets.
//! - [`info`]: entropy, KL divergence and effective information.
//! - [`phi`]: partitions, the minimum information partition, complexes and
//!   system φ.
//! - [`oracle`]: an independent brute-force reference used in tests.
//!
//! ```
//! use pbn_phi::{Distribution, Network, NodeLaw, NodeSet, PhiEngine, PhiOptions};
//!
//! // two nodes that swap values every step
//! let net = Network::new(vec![
//!     NodeLaw::new(1, vec![2], vec![0.0, 1.0]),
//!     NodeLaw::new(2, vec![1], vec![0.0, 1.0]),
//! ])
//! .validate()
//! .unwrap();
//! let engine = PhiEngine::new(&net, &Distribution::uniform(4), 1, PhiOptions::default()).unwrap();
//! let report = engine.subset_phi(NodeSet::full(2), 0b01).unwrap();
//! assert_eq!(report.phi_raw, 2.0);
//! ```

pub mod distribution;
pub mod dynamics;
pub mod error;
pub mod info;
pub mod marginalize;
pub mod network;
pub mod oracle;
pub mod phi;

pub use distribution::Distribution;
pub use dynamics::{
    backward_matrix, backward_matrix_uniform, build_transition_matrix, distribution_at,
    evolve_distribution, stationary_distribution, BackwardMatrix, PartialRows, TimeSlice,
    TransitionMatrix,
};
pub use error::{Error, Result};
pub use info::{
    effective_information, effective_information_stationary, effective_information_uniform,
    entropy, kl_divergence, subset_effective_information, Bits,
};
pub use marginalize::{
    marginal_distribution, project_state, subset_backward_matrix, subset_transition_matrix,
    NodeSet, SubsetJoint, SubsetTransitionMatrix,
};
pub use network::{
    validate_network, validate_network_with_limit, Network, NodeLaw, ValidatedNetwork,
};
pub use phi::{
    enumerate_bipartitions, enumerate_partitions, is_disconnected, with_threads, Complex,
    ComplexScan, Normalization, Partition, PartitionEntry, PartitionScope, PhiEngine, PhiOptions,
    PhiReport,
};
