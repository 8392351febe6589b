//! Estimation and state compression of finite-state Markov chains observed
//! through trajectories.
//!
//! The crate provides:
//!
//! - [`chain`]: the core data model: trajectories, stochastic and frequency
//!   matrices, stationary distributions, mixing times, and seeded simulation;
//! - [`spectral`]: truncated-SVD estimators for low-rank frequency/transition
//!   matrices and rectangular conditional matrices, leading feature subspaces,
//!   and k-means–based state partitioning (aggregation and lumpable blocks);
//! - [`metrics`]: the losses used to evaluate them (entrywise l1, row total
//!   variation, principal-angle distances, permutation-minimized
//!   misclassification, KL divergence);
//! - [`synth`]: seeded ground-truth generators with known low-rank,
//!   aggregatable, or lumpable structure, plus near-uniform fixture families;
//! - [`sweep`]: a deterministic Monte-Carlo harness comparing spectral and
//!   empirical estimators across sample-size grids;
//! - [`taxi`]: a trip-record ingestion pipeline (grid discretization, visit
//!   filtering, time stratification, transition counting, partition export);
//! - [`io`]: CSV and JSON envelope serialization for all of the above.

pub mod chain;
pub mod error;
pub mod io;
pub mod metrics;
pub mod spectral;
pub mod sweep;
pub mod synth;
pub mod taxi;

mod util;

pub use chain::{
    ChainDiagnostics, FrequencyMatrix, StationaryDistribution, StochasticMatrix, Trajectory,
};
pub use error::{Error, Result};
pub use metrics::LossReport;
pub use spectral::{KMeansConfig, LowRankEstimate, PartitionLabels, SubspaceBasis, SvdResult};
pub use synth::GroundTruthChain;
