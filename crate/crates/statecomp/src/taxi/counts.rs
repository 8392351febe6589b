use nalgebra::DMatrix;

use crate::chain::{FrequencyMatrix, StochasticMatrix};
use crate::error::{Error, Result};

/// Transition counts over the dense state space with the derived empirical
/// matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionCounts {
    pub counts: DMatrix<f64>,
    pub f_tilde: FrequencyMatrix,
    pub p_tilde: StochasticMatrix,
    pub total: usize,
}

/// Accumulates the count matrix over dense-state pairs and derives the
/// empirical frequency matrix (counts over total) and transition matrix
/// (rows normalized, uniform fallback for unseen sources).
pub fn build_counts(pairs: &[(usize, usize)], p: usize) -> Result<TransitionCounts> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("no transition pairs to count".into()));
    }
    if p == 0 {
        return Err(Error::InvalidParameter("state space must be nonempty".into()));
    }
    let mut counts = DMatrix::<f64>::zeros(p, p);
    for &(a, b) in pairs {
        if a >= p || b >= p {
            return Err(Error::InvalidParameter(format!(
                "pair ({a}, {b}) out of range for p = {p}"
            )));
        }
        counts[(a, b)] += 1.0;
    }
    let total = pairs.len();
    let f_tilde = FrequencyMatrix::new(&counts / total as f64)?;

    let mut rows = counts.clone();
    for i in 0..p {
        let row_sum: f64 = rows.row(i).sum();
        if row_sum > 0.0 {
            rows.row_mut(i).scale_mut(1.0 / row_sum);
        } else {
            rows.row_mut(i).fill(1.0 / p as f64);
        }
    }
    let p_tilde = StochasticMatrix::new(rows)?;

    Ok(TransitionCounts { counts, f_tilde, p_tilde, total })
}
