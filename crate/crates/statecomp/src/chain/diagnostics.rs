use serde::{Deserialize, Serialize};

use crate::chain::{
    frequency_from_transition, mixing_time, reversible_second_eigenvalue, stationary_distribution,
    StochasticMatrix,
};
use crate::error::{Error, Result};

/// Conditioning summary of a chain: stationary extremes, spikiness, effective
/// rank, the singular gap of the frequency matrix, and the mixing time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainDiagnostics {
    pub pi_min: f64,
    pub pi_max: f64,
    /// `p^2 * max_ij F_ij`; at least 1, larger for spikier chains.
    pub kappa: f64,
    /// `||F||_F^2 / sigma_r^2(F)`; at least `r` for a rank-`r` chain.
    pub r_tilde: f64,
    /// `sigma_r(F)`.
    pub sigma_r: f64,
    /// `sigma_{r+1}(F)` (zero when `r = p`).
    pub sigma_r_plus_1: f64,
    /// Second-largest eigenvalue; present only for reversible chains.
    pub lambda2: Option<f64>,
    /// Mixing time `tau(1/4)`.
    pub tau_star: usize,
    /// Set when `sigma_r - sigma_{r+1} <= 1e-12`, in which case the rank-`r`
    /// subspace identity is ill-posed.
    pub degenerate_gap: bool,
}

impl ChainDiagnostics {
    /// Computes diagnostics for an ergodic-class transition matrix at rank `r`.
    pub fn from_transition(p: &StochasticMatrix, r: usize) -> Result<Self> {
        let dim = p.nrows();
        if r < 1 || r > dim {
            return Err(Error::RankOutOfRange { r, rows: dim, cols: dim });
        }
        let pi = stationary_distribution(p)?;
        let f = frequency_from_transition(p, &pi)?;

        let max_entry = f.as_matrix().iter().copied().fold(0.0, f64::max);
        let kappa = (dim * dim) as f64 * max_entry;
        let frob_sq: f64 = f.as_matrix().iter().map(|x| x * x).sum();

        let mut sigmas: Vec<f64> =
            f.as_matrix().clone().svd(false, false).singular_values.iter().copied().collect();
        sigmas.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let sigma_r = sigmas[r - 1];
        let sigma_r_plus_1 = if r < dim { sigmas[r] } else { 0.0 };

        let lambda2 = reversible_second_eigenvalue(p).ok();
        let tau_star = mixing_time(p, 0.25)?;

        Ok(Self {
            pi_min: pi.pi_min(),
            pi_max: pi.pi_max(),
            kappa,
            r_tilde: frob_sq / (sigma_r * sigma_r),
            sigma_r,
            sigma_r_plus_1,
            lambda2,
            tau_star,
            degenerate_gap: sigma_r - sigma_r_plus_1 <= 1e-12,
        })
    }
}
