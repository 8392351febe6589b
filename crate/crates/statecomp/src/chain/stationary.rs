use nalgebra::{DMatrix, DVector};

use crate::chain::{validate_transition, StochasticMatrix};
use crate::error::{Error, Result};

/// The stationary distribution of an ergodic chain together with its extremes.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    probs: Vec<f64>,
    pi_min: f64,
    pi_max: f64,
}

impl StationaryDistribution {
    pub(crate) fn from_probs(probs: Vec<f64>) -> Self {
        let pi_min = probs.iter().copied().fold(f64::INFINITY, f64::min);
        let pi_max = probs.iter().copied().fold(0.0, f64::max);
        Self { probs, pi_min, pi_max }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn pi_min(&self) -> f64 {
        self.pi_min
    }

    pub fn pi_max(&self) -> f64 {
        self.pi_max
    }

    /// `max(residual of pi' P = pi', in l1)` against a transition matrix.
    pub fn residual(&self, p: &StochasticMatrix) -> f64 {
        let pi = DVector::from_column_slice(&self.probs);
        let image = p.as_matrix().transpose() * &pi;
        (image - pi).abs().sum()
    }
}

/// Chains at most this large use the direct linear solve; larger ones start
/// with power iteration.
const DIRECT_SOLVE_MAX_DIM: usize = 512;
const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITERS: usize = 1_000_000;
const RESIDUAL_TOL: f64 = 1e-10;

/// Computes the stationary distribution of an ergodic-class transition matrix.
///
/// Solves the null space of `(P' - I)` under the simplex normalization for
/// `p <= 512` and falls back to power iteration (tolerance 1e-12, at most 1e6
/// iterations) otherwise or when the solve is unusable. The returned
/// distribution satisfies `pi' P = pi'` with l1 residual below 1e-10.
pub fn stationary_distribution(p: &StochasticMatrix) -> Result<StationaryDistribution> {
    let report = validate_transition(p.as_matrix())?;
    if !report.is_ergodic_class {
        return Err(Error::NotErgodic(
            "stationary distribution requires an ergodic-class matrix".into(),
        ));
    }
    let dim = p.nrows();

    let mut candidate = if dim <= DIRECT_SOLVE_MAX_DIM { direct_solve(p) } else { None };
    if candidate.is_none() {
        candidate = power_iteration(p);
    }
    let Some(probs) = candidate else {
        return Err(Error::NotConverged {
            context: "stationary distribution power iteration".into(),
            residual: f64::NAN,
        });
    };

    let dist = StationaryDistribution::from_probs(probs);
    let residual = dist.residual(p);
    if residual > RESIDUAL_TOL {
        return Err(Error::NotConverged {
            context: "stationary distribution residual check".into(),
            residual,
        });
    }
    Ok(dist)
}

/// Replace one equation of `(P' - I) x = 0` with the simplex constraint and
/// solve by LU. Returns `None` when the solve fails or leaves the simplex.
fn direct_solve(p: &StochasticMatrix) -> Option<Vec<f64>> {
    let dim = p.nrows();
    let mut a = p.as_matrix().transpose() - DMatrix::<f64>::identity(dim, dim);
    for j in 0..dim {
        a[(dim - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(dim);
    b[dim - 1] = 1.0;
    let x = a.lu().solve(&b)?;
    let sum: f64 = x.iter().sum();
    if !(sum.is_finite() && sum > 0.0) {
        return None;
    }
    let probs: Vec<f64> = x.iter().map(|v| v / sum).collect();
    if probs.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
        return None;
    }
    Some(probs)
}

/// Power iteration on the lazy chain `(P + I) / 2`, which shares the
/// stationary distribution but is aperiodic, so iteration always converges
/// for ergodic-class inputs.
fn power_iteration(p: &StochasticMatrix) -> Option<Vec<f64>> {
    let dim = p.nrows();
    let pt = p.as_matrix().transpose();
    let mut x = DVector::from_element(dim, 1.0 / dim as f64);
    for _ in 0..POWER_MAX_ITERS {
        let mut next = &pt * &x;
        next = (next + &x) * 0.5;
        let total: f64 = next.iter().sum();
        next.scale_mut(1.0 / total);
        let delta: f64 = (&next - &x).abs().sum();
        x = next;
        if delta < POWER_TOL {
            let probs: Vec<f64> = x.iter().copied().collect();
            if probs.iter().all(|&v| v > 0.0) {
                return Some(probs);
            }
            return None;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn stochastic(rows: &[&[f64]]) -> StochasticMatrix {
        StochasticMatrix::new(DMatrix::from_row_iterator(
            rows.len(),
            rows[0].len(),
            rows.iter().flat_map(|r| r.iter().copied()),
        ))
        .unwrap()
    }

    #[test]
    fn symmetric_chain_has_uniform_distribution() {
        let p = stochastic(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let pi = stationary_distribution(&p).unwrap();
        assert!((pi.probs()[0] - 0.5).abs() < 1e-14);
        assert!((pi.probs()[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn two_state_chain_matches_hand_solution() {
        // Balance: pi_0 * 0.1 = pi_1 * 0.2, so pi = (2/3, 1/3).
        let p = stochastic(&[&[0.9, 0.1], &[0.2, 0.8]]);
        let pi = stationary_distribution(&p).unwrap();
        assert!((pi.probs()[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((pi.probs()[1] - 1.0 / 3.0).abs() < 1e-12);
        assert!(pi.residual(&p) < 1e-10);
        assert!((pi.pi_min() - 1.0 / 3.0).abs() < 1e-12);
        assert!((pi.pi_max() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn periodic_ergodic_chain_is_still_solvable() {
        let p = stochastic(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let pi = stationary_distribution(&p).unwrap();
        assert!((pi.probs()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn non_ergodic_input_is_a_structural_error() {
        let p = stochastic(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(stationary_distribution(&p), Err(Error::NotErgodic(_))));
    }

    #[test]
    fn power_iteration_agrees_with_direct_solve() {
        let p = stochastic(&[&[0.9, 0.1], &[0.2, 0.8]]);
        let via_power = power_iteration(&p).unwrap();
        assert!((via_power[0] - 2.0 / 3.0).abs() < 1e-10);
        assert!((via_power[1] - 1.0 / 3.0).abs() < 1e-10);
    }
}
