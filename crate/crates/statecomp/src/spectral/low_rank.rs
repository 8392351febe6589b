use nalgebra::DMatrix;

use crate::chain::{empirical_frequency, FrequencyMatrix, StochasticMatrix, Trajectory};
use crate::error::{Error, Result};
use crate::spectral::truncated_svd;

/// Output of the low-rank frequency/transition estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankEstimate {
    /// Nonnegative frequency estimate with total mass 1.
    pub f_hat: FrequencyMatrix,
    /// Row-stochastic transition estimate.
    pub p_hat: StochasticMatrix,
    /// The rank-`r` core before the positivity and normalization steps.
    pub f0: DMatrix<f64>,
    /// Rank used for the truncation.
    pub rank: usize,
}

/// Runs the low-rank estimator on a trajectory: empirical frequency matrix,
/// rank-`r` truncation, positive part, global and then row normalization.
pub fn estimate_low_rank(traj: &Trajectory, r: usize) -> Result<LowRankEstimate> {
    let f_tilde = empirical_frequency(traj)?;
    estimate_low_rank_from_matrix(&f_tilde, r)
}

/// Matrix-level entry point of the low-rank estimator, for exact inputs.
///
/// `f_hat` is the positive part of the truncation scaled to total mass 1;
/// `p_hat` rows are the normalized rows of `f_hat`, with the uniform row
/// substituted where a row has no mass.
pub fn estimate_low_rank_from_matrix(f_tilde: &FrequencyMatrix, r: usize) -> Result<LowRankEstimate> {
    let p = f_tilde.dim();
    let svd = truncated_svd(f_tilde.as_matrix(), r)?;
    let f0 = svd.reconstruct();

    let mut clipped = f0.clone();
    clipped.apply(|x| *x = x.max(0.0));
    let total: f64 = clipped.sum();
    if total <= 0.0 {
        return Err(Error::DegenerateEstimate(
            "truncated frequency matrix has no positive mass".into(),
        ));
    }
    clipped.scale_mut(1.0 / total);
    let f_hat = FrequencyMatrix::new(clipped.clone())?;

    for i in 0..p {
        let row_sum: f64 = clipped.row(i).sum();
        if row_sum > 0.0 {
            clipped.row_mut(i).scale_mut(1.0 / row_sum);
        } else {
            clipped.row_mut(i).fill(1.0 / p as f64);
        }
    }
    let p_hat = StochasticMatrix::new(clipped)?;

    Ok(LowRankEstimate { f_hat, p_hat, f0, rank: r })
}

/// Output of the rectangular conditional-matrix estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct RectangularEstimate {
    /// Row-stochastic `p x q` estimate of the conditional matrix.
    pub q_hat: StochasticMatrix,
    /// Rank-`r` truncation of the empirical joint matrix.
    pub g0: DMatrix<f64>,
    /// Empirical joint matrix of the observed pairs.
    pub g_tilde: DMatrix<f64>,
}

/// Estimates a `p x q` conditional probability matrix of rank `r` from a
/// stream of `(x, y)` pairs.
///
/// The empirical joint matrix is truncated to rank `r`; each row of the
/// estimate is the normalized positive part, with the uniform row `1/q`
/// where a row has no positive mass.
pub fn estimate_rectangular(
    pairs: &[(usize, usize)],
    p: usize,
    q: usize,
    r: usize,
) -> Result<RectangularEstimate> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("at least one (x, y) pair is required".into()));
    }
    if p == 0 || q == 0 {
        return Err(Error::InvalidParameter("state spaces must be nonempty".into()));
    }
    if r < 1 || r > p.min(q) {
        return Err(Error::RankOutOfRange { r, rows: p, cols: q });
    }
    let mut g_tilde = DMatrix::<f64>::zeros(p, q);
    for &(x, y) in pairs {
        if x >= p || y >= q {
            return Err(Error::InvalidParameter(format!(
                "pair ({x}, {y}) out of range for {p} x {q}"
            )));
        }
        g_tilde[(x, y)] += 1.0;
    }
    g_tilde.scale_mut(1.0 / pairs.len() as f64);

    let g0 = truncated_svd(&g_tilde, r)?.reconstruct();
    let mut rows = g0.clone();
    rows.apply(|x| *x = x.max(0.0));
    for i in 0..p {
        let row_sum: f64 = rows.row(i).sum();
        if row_sum > 0.0 {
            rows.row_mut(i).scale_mut(1.0 / row_sum);
        } else {
            rows.row_mut(i).fill(1.0 / q as f64);
        }
    }
    let q_hat = StochasticMatrix::new(rows)?;

    Ok(RectangularEstimate { q_hat, g0, g_tilde })
}
