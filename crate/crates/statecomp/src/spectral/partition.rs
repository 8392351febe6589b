use crate::chain::{empirical_frequency, empirical_transition, FrequencyMatrix, StochasticMatrix, Trajectory};
use crate::error::{Error, Result};
use crate::spectral::{kmeans, truncated_svd, KMeansConfig};

/// Assignment of each state to one of `r` blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionLabels {
    labels: Vec<usize>,
    blocks: usize,
}

impl PartitionLabels {
    /// Wraps a label vector, checking every block index lies in `[0, blocks)`.
    pub fn new(labels: Vec<usize>, blocks: usize) -> Result<Self> {
        if blocks == 0 {
            return Err(Error::InvalidParameter("block count must be >= 1".into()));
        }
        if labels.is_empty() {
            return Err(Error::EmptyInput("label vector must be nonempty".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= blocks) {
            return Err(Error::InvalidParameter(format!(
                "block index {bad} out of range for {blocks} blocks"
            )));
        }
        Ok(Self { labels, blocks })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Number of states.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of blocks `r`.
    pub fn blocks(&self) -> usize {
        self.blocks
    }

    /// States of each block, in index order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.blocks];
        for (state, &block) in self.labels.iter().enumerate() {
            out[block].push(state);
        }
        out
    }
}

/// State aggregation: clusters states by the rows of the leading left
/// singular vectors of the empirical transition matrix.
pub fn spectral_state_aggregation(
    traj: &Trajectory,
    r: usize,
    config: &KMeansConfig,
) -> Result<PartitionLabels> {
    let p_tilde = empirical_transition(traj)?;
    aggregation_from_transition(&p_tilde, r, config)
}

/// Matrix-level entry point for state aggregation; accepts either an exact
/// transition matrix or an empirical one.
pub fn aggregation_from_transition(
    p: &StochasticMatrix,
    r: usize,
    config: &KMeansConfig,
) -> Result<PartitionLabels> {
    let svd = truncated_svd(p.as_matrix(), r)?;
    kmeans(svd.u(), r, config)
}

/// Lumpable partition: clusters states by the rows of the leading right
/// singular vectors of the empirical frequency matrix.
pub fn spectral_lumpable_partition(
    traj: &Trajectory,
    r: usize,
    config: &KMeansConfig,
) -> Result<PartitionLabels> {
    let f_tilde = empirical_frequency(traj)?;
    lumpable_from_frequency(&f_tilde, r, config)
}

/// Matrix-level entry point for the lumpable partition.
pub fn lumpable_from_frequency(
    f: &FrequencyMatrix,
    r: usize,
    config: &KMeansConfig,
) -> Result<PartitionLabels> {
    let svd = truncated_svd(f.as_matrix(), r)?;
    kmeans(svd.v(), r, config)
}
