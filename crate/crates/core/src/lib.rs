//! Phonetic categories as empirical distributions over the discrete units of
//! speech quantizers.
//!
//! The pipeline runs in two stages. Ingestion ([`corpus`], [`pipeline`])
//! parses phone alignments and quantizer unit sequences, assigns frames to
//! phone segments and accumulates per-category unit counts. Analysis turns
//! those counts into maximum-likelihood distributions ([`distribution`]) and
//! measures them: entropy and Jensen-Shannon divergence ([`infotheory`]),
//! Ward clustering of the divergence matrix ([`cluster`]), feature-based
//! phonetic distance ([`phonology`]) and correlation / nearest-neighbour
//! queries ([`stats`]).
//!
//! The numerical kernels are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the double-precision types used by the file formats.

pub mod cluster;
pub mod corpus;
pub mod distribution;
pub mod export;
pub mod infotheory;
pub mod matrix;
pub mod phonology;
pub mod pipeline;
pub mod report;
pub mod scalar;
pub mod special;
pub mod stats;

pub use cluster::{cut, to_newick, ward_cluster, ClusterError, Dendrogram, Merge};
pub use corpus::{BagSet, PhoneAlignment, PhoneMapping, UnitObservationBag, UnitSequence};
pub use distribution::{utilization, DistributionError, PhoneticDistribution};
pub use infotheory::{
    entropy, js_divergence, jsd_matrix, kl_divergence, normalized_entropy, surprisal, InfoError,
};
pub use matrix::{DistanceMatrix, MatrixError};
pub use phonology::{ClassTable, FeatureTable, PhonologyError};
pub use scalar::Scalar;
pub use stats::{correlate_matrices, pearson, top_k_similar, CorrelationResult, StatsError};

pub type Distribution = PhoneticDistribution<f64>;
pub type Distribution32 = PhoneticDistribution<f32>;
pub type JsdMatrix = DistanceMatrix<f64>;
pub type Tree = Dendrogram<f64>;
pub type Correlation = CorrelationResult<f64>;
