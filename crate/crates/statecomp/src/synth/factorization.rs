use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chain::Trajectory;
use crate::error::{Error, Result};

/// A rank-`r` factorization of a transition kernel: `P = left * right^T`,
/// where the columns of `right` are probability mass vectors and the `r x r`
/// kernel is `right^T * left`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankFactorization {
    left: DMatrix<f64>,
    right: DMatrix<f64>,
    kernel: DMatrix<f64>,
}

impl LowRankFactorization {
    /// Builds a factorization, normalizing nothing: `right` columns must
    /// already be nonnegative unit-mass vectors and the kernel must be
    /// nondegenerate.
    pub fn new(left: DMatrix<f64>, right: DMatrix<f64>) -> Result<Self> {
        if left.shape() != right.shape() {
            return Err(Error::Dimension(format!(
                "left is {:?} but right is {:?}",
                left.shape(),
                right.shape()
            )));
        }
        for j in 0..right.ncols() {
            let col = right.column(j);
            if col.iter().any(|&x| x < 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "right feature column {j} has negative entries"
                )));
            }
            let total: f64 = col.sum();
            if (total - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidParameter(format!(
                    "right feature column {j} sums to {total}, not 1"
                )));
            }
        }
        let kernel = right.transpose() * &left;
        let det = kernel.clone().lu().determinant();
        if det.abs() <= 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "kernel is degenerate (det {det:.3e})"
            )));
        }
        Ok(Self { left, right, kernel })
    }

    /// Left features, `p x r`.
    pub fn left(&self) -> &DMatrix<f64> {
        &self.left
    }

    /// Right features, `p x r`, probability-mass columns.
    pub fn right(&self) -> &DMatrix<f64> {
        &self.right
    }

    /// The `r x r` kernel `right^T * left`.
    pub fn kernel(&self) -> &DMatrix<f64> {
        &self.kernel
    }

    /// Number of states `p`.
    pub fn dim(&self) -> usize {
        self.left.nrows()
    }

    /// Factorization rank `r`.
    pub fn rank(&self) -> usize {
        self.left.ncols()
    }

    /// True when both factors are entrywise nonnegative, as the latent-state
    /// sampler requires.
    pub fn is_nonnegative(&self) -> bool {
        self.left.iter().all(|&x| x >= 0.0) && self.right.iter().all(|&x| x >= 0.0)
    }
}

/// `n`-step kernel through the factorization: `left * kernel^(n-1) * right^T`,
/// which equals the dense power `P^n`.
pub fn kernel_power(fact: &LowRankFactorization, n: usize) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("power n must be >= 1".into()));
    }
    let r = fact.rank();
    let mut mid = DMatrix::<f64>::identity(r, r);
    for _ in 1..n {
        mid = &mid * fact.kernel();
    }
    Ok(fact.left() * mid * fact.right().transpose())
}

/// Samples a latent block index for every transition of the trajectory, with
/// probability proportional to `left[from, k] * right[to, k]`.
///
/// Requires a nonnegative factorization; a transition whose weights all
/// vanish means the factorization cannot have generated the walk.
pub fn augment_with_latent(
    fact: &LowRankFactorization,
    traj: &Trajectory,
    seed: u64,
) -> Result<Vec<usize>> {
    if !fact.is_nonnegative() {
        return Err(Error::InvalidParameter(
            "latent augmentation requires nonnegative features".into(),
        ));
    }
    if traj.num_states() != fact.dim() {
        return Err(Error::Dimension(format!(
            "trajectory has {} states but factorization has {}",
            traj.num_states(),
            fact.dim()
        )));
    }
    traj.require_transitions(1)?;
    let r = fact.rank();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(traj.transitions());
    for (from, to) in traj.pairs() {
        let weights: Vec<f64> = (0..r).map(|k| fact.left()[(from, k)] * fact.right()[(to, k)]).collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InconsistentFactorization { from, to });
        }
        let mut u = rng.gen::<f64>() * total;
        let mut chosen = r - 1;
        for (k, &w) in weights.iter().enumerate() {
            u -= w;
            if u <= 0.0 {
                chosen = k;
                break;
            }
        }
        out.push(chosen);
    }
    Ok(out)
}
