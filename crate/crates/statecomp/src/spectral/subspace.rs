use nalgebra::DMatrix;

use crate::chain::{empirical_frequency, empirical_transition, FrequencyMatrix, StochasticMatrix, Trajectory};
use crate::error::{Error, Result};
use crate::spectral::truncated_svd;

/// Which singular factor the basis came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Which matrix the basis came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Frequency,
    Transition,
}

/// A `p x r` matrix with orthonormal columns spanning a feature subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    basis: DMatrix<f64>,
    pub side: Side,
    pub source: Source,
}

const ORTHO_TOL: f64 = 1e-8;

impl SubspaceBasis {
    /// Wraps a basis matrix, checking orthonormality of the columns to 1e-8.
    pub fn new(basis: DMatrix<f64>, side: Side, source: Source) -> Result<Self> {
        let gram = basis.transpose() * &basis;
        let identity = DMatrix::<f64>::identity(gram.nrows(), gram.ncols());
        let err = (gram - identity).abs().max();
        if err > ORTHO_TOL {
            return Err(Error::InvalidParameter(format!(
                "basis columns are not orthonormal (deviation {err:.3e})"
            )));
        }
        Ok(Self { basis, side, source })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Ambient dimension `p`.
    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Subspace dimension `r`.
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }
}

/// The four estimated feature subspaces of a chain: left/right factors of the
/// frequency matrix and of the transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSubspaces {
    pub u_f: SubspaceBasis,
    pub v_f: SubspaceBasis,
    pub u_p: SubspaceBasis,
    pub v_p: SubspaceBasis,
}

/// Estimates the four leading feature subspaces from a trajectory, using the
/// empirical frequency and transition matrices (including the uniform-row
/// fallback for never-visited sources).
pub fn leading_subspaces(traj: &Trajectory, r: usize) -> Result<FeatureSubspaces> {
    let f_tilde = empirical_frequency(traj)?;
    let p_tilde = empirical_transition(traj)?;
    leading_subspaces_from_matrices(&f_tilde, &p_tilde, r)
}

/// Matrix-level entry point: top-`r` left/right singular subspaces of the
/// given frequency and transition matrices.
pub fn leading_subspaces_from_matrices(
    f: &FrequencyMatrix,
    p: &StochasticMatrix,
    r: usize,
) -> Result<FeatureSubspaces> {
    let f_svd = truncated_svd(f.as_matrix(), r)?;
    let p_svd = truncated_svd(p.as_matrix(), r)?;
    Ok(FeatureSubspaces {
        u_f: SubspaceBasis::new(f_svd.u().clone(), Side::Left, Source::Frequency)?,
        v_f: SubspaceBasis::new(f_svd.v().clone(), Side::Right, Source::Frequency)?,
        u_p: SubspaceBasis::new(p_svd.u().clone(), Side::Left, Source::Transition)?,
        v_p: SubspaceBasis::new(p_svd.v().clone(), Side::Right, Source::Transition)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{frequency_from_transition, stationary_distribution};
    use crate::metrics::{sin_theta, SinThetaNorm};

    #[test]
    fn exact_rank_r_inputs_recover_the_true_subspaces() {
        let truth = crate::synth::gen_low_rank_chain(12, 3, 4).unwrap();
        let est = leading_subspaces_from_matrices(truth.frequency(), truth.transition(), 3).unwrap();
        let pi = stationary_distribution(truth.transition()).unwrap();
        let f = frequency_from_transition(truth.transition(), &pi).unwrap();
        let f_svd = truncated_svd(f.as_matrix(), 3).unwrap();
        let angle = sin_theta(est.u_f.matrix(), f_svd.u(), SinThetaNorm::Spectral).unwrap();
        assert!(angle < 1e-10);
    }

    #[test]
    fn bases_are_sign_flip_invariant_as_subspaces() {
        let truth = crate::synth::gen_low_rank_chain(10, 2, 8).unwrap();
        let est = leading_subspaces_from_matrices(truth.frequency(), truth.transition(), 2).unwrap();
        let mut flipped = est.u_f.matrix().clone();
        flipped.column_mut(0).neg_mut();
        let angle = sin_theta(est.u_f.matrix(), &flipped, SinThetaNorm::Frobenius).unwrap();
        assert!(angle < 1e-12);
    }

    #[test]
    fn non_orthonormal_basis_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(SubspaceBasis::new(m, Side::Left, Source::Frequency).is_err());
    }
}
