//! Spectral procedures: truncated SVD with a fixed sign convention, low-rank
//! frequency/transition estimation, rectangular conditional-matrix estimation,
//! leading feature subspaces, and the k-means engine behind the two state
//! partition estimators.

mod kmeans;
mod low_rank;
mod partition;
mod subspace;
mod svd;

pub use kmeans::{kmeans, KMeansConfig};
pub use low_rank::{
    estimate_low_rank, estimate_low_rank_from_matrix, estimate_rectangular, LowRankEstimate,
    RectangularEstimate,
};
pub use partition::{
    aggregation_from_transition, lumpable_from_frequency, spectral_lumpable_partition,
    spectral_state_aggregation, PartitionLabels,
};
pub use subspace::{
    leading_subspaces, leading_subspaces_from_matrices, FeatureSubspaces, Side, Source,
    SubspaceBasis,
};
pub use svd::{truncated_svd, SvdResult};
