use nalgebra::DMatrix;

use crate::chain::{stationary_distribution, validate_transition, StochasticMatrix};
use crate::error::{Error, Result};

/// Size caps for the dense-power mixing-time computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingCaps {
    /// Largest state-space size worth iterating densely.
    pub max_dim: usize,
    /// Largest power to try before giving up.
    pub max_steps: usize,
}

impl Default for MixingCaps {
    fn default() -> Self {
        Self { max_dim: 2000, max_steps: 1_000_000 }
    }
}

/// Mixing time with default caps; see [`mixing_time_with_caps`].
pub fn mixing_time(p: &StochasticMatrix, epsilon: f64) -> Result<usize> {
    mixing_time_with_caps(p, epsilon, MixingCaps::default())
}

/// Smallest `k >= 1` with `max_i (1/2) || (P^k)[i, :] - pi ||_1 <= epsilon`,
/// computed by iterated dense multiplication.
///
/// Exceeding the step cap is reported separately from non-ergodicity and
/// carries the last observed distance.
pub fn mixing_time_with_caps(p: &StochasticMatrix, epsilon: f64, caps: MixingCaps) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if p.nrows() > caps.max_dim {
        return Err(Error::InvalidParameter(format!(
            "state space {} exceeds the dense-power cap {}",
            p.nrows(),
            caps.max_dim
        )));
    }
    let pi = stationary_distribution(p)?;
    let base = p.as_matrix();
    let mut power = base.clone();
    let mut last = f64::INFINITY;
    for k in 1..=caps.max_steps {
        last = tv_from_stationary(&power, pi.probs());
        if last <= epsilon {
            return Ok(k);
        }
        power = &power * base;
    }
    Err(Error::MixingCapExceeded { cap: caps.max_steps, last_distance: last })
}

fn tv_from_stationary(power: &DMatrix<f64>, pi: &[f64]) -> f64 {
    let p = power.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..p {
        let mut dist = 0.0;
        for j in 0..p {
            dist += (power[(i, j)] - pi[j]).abs();
        }
        worst = worst.max(0.5 * dist);
    }
    worst
}

const REVERSIBILITY_TOL: f64 = 1e-10;

/// Second-largest eigenvalue of a reversible transition matrix.
///
/// Reversibility (detailed balance `pi_i P_ij = pi_j P_ji`) is checked to
/// 1e-10; the spectrum is then real and is computed from the symmetrization
/// `D^{1/2} P D^{-1/2}` with `D = diag(pi)`.
pub fn reversible_second_eigenvalue(p: &StochasticMatrix) -> Result<f64> {
    let report = validate_transition(p.as_matrix())?;
    if !report.is_ergodic_class {
        return Err(Error::NotErgodic("eigengap analysis requires an ergodic-class matrix".into()));
    }
    let pi = stationary_distribution(p)?;
    let dim = p.nrows();
    let m = p.as_matrix();

    let mut max_violation: f64 = 0.0;
    for i in 0..dim {
        for j in (i + 1)..dim {
            let v = (pi.probs()[i] * m[(i, j)] - pi.probs()[j] * m[(j, i)]).abs();
            max_violation = max_violation.max(v);
        }
    }
    if max_violation > REVERSIBILITY_TOL {
        return Err(Error::NotReversible { max_violation });
    }

    let mut sym = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let scale = (pi.probs()[i] / pi.probs()[j]).sqrt();
            sym[(i, j)] = scale * m[(i, j)];
        }
    }
    // Guard against asymmetry from rounding before the eigensolve.
    let sym = (&sym + sym.transpose()) * 0.5;
    let mut eigs: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(eigs[1])
}

/// Upper bound `log(1 / (epsilon * pi_min)) / (1 - lambda_2)` on the mixing
/// time of a reversible chain.
pub fn eigengap_mixing_bound(p: &StochasticMatrix, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let lambda2 = reversible_second_eigenvalue(p)?;
    if lambda2 >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "second eigenvalue {lambda2} is not below 1"
        )));
    }
    let pi = stationary_distribution(p)?;
    Ok((1.0 / (epsilon * pi.pi_min())).ln() / (1.0 - lambda2))
}

/// `log(n / pi_min) * log(n) / (1 - lambda_2)`: the eigengap replacement for
/// the `tau(1/4) * log^2(n)` factor in the estimation error rates, available
/// whenever the chain is reversible.
pub fn eigengap_rate_factor(p: &StochasticMatrix, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter("sample size n must be >= 2".into()));
    }
    let lambda2 = reversible_second_eigenvalue(p)?;
    if lambda2 >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "second eigenvalue {lambda2} is not below 1"
        )));
    }
    let pi = stationary_distribution(p)?;
    let n = n as f64;
    Ok((n / pi.pi_min()).ln() * n.ln() / (1.0 - lambda2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stochastic(rows: &[&[f64]]) -> StochasticMatrix {
        StochasticMatrix::new(DMatrix::from_row_iterator(
            rows.len(),
            rows[0].len(),
            rows.iter().flat_map(|r| r.iter().copied()),
        ))
        .unwrap()
    }

    #[test]
    fn uniform_kernel_mixes_in_one_step() {
        let p = 5;
        let m = stochastic(&[&[0.2; 5]; 5].map(|r| &r[..]));
        assert_eq!(mixing_time(&m, 0.25).unwrap(), 1);
        assert_eq!(mixing_time(&m, 1e-6).unwrap(), 1);
        assert_eq!(p, 5);
    }

    #[test]
    fn two_state_chain_mixes_in_three_steps_at_quarter() {
        // Row distances decay as (2/3) * 0.7^k; first k with value <= 1/4 is 3.
        let m = stochastic(&[&[0.9, 0.1], &[0.2, 0.8]]);
        assert_eq!(mixing_time(&m, 0.25).unwrap(), 3);
    }

    #[test]
    fn mixing_time_is_monotone_in_epsilon() {
        let m = stochastic(&[&[0.9, 0.1], &[0.2, 0.8]]);
        let taus: Vec<usize> = [0.01, 0.05, 0.1, 0.25, 0.4]
            .iter()
            .map(|&e| mixing_time(&m, e).unwrap())
            .collect();
        for w in taus.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn periodic_chain_hits_the_cap() {
        let m = stochastic(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let err = mixing_time_with_caps(&m, 0.25, MixingCaps { max_dim: 2000, max_steps: 50 })
            .unwrap_err();
        match err {
            Error::MixingCapExceeded { cap, last_distance } => {
                assert_eq!(cap, 50);
                assert!(last_distance > 0.25);
            }
            other => panic!("expected cap error, got {other}"),
        }
    }

    #[test]
    fn eigengap_bound_matches_hand_computation() {
        // lambda_2 = 0.7 (trace 1.7, det 0.7), pi_min = 1/3.
        let m = stochastic(&[&[0.9, 0.1], &[0.2, 0.8]]);
        let bound = eigengap_mixing_bound(&m, 0.25).unwrap();
        assert!((bound - (12.0f64).ln() / 0.3).abs() < 1e-9);
        assert!(bound >= mixing_time(&m, 0.25).unwrap() as f64);
    }

    #[test]
    fn rank_one_kernel_has_zero_second_eigenvalue() {
        let m = stochastic(&[&[0.25; 4]; 4].map(|r| &r[..]));
        let lambda2 = reversible_second_eigenvalue(&m).unwrap();
        assert!(lambda2.abs() < 1e-10);
        let bound = eigengap_mixing_bound(&m, 0.25).unwrap();
        assert!((bound - (16.0f64).ln()).abs() < 1e-9);
    }

    #[test]
    fn rate_factor_replaces_the_mixing_term() {
        // lambda_2 = 0.7, pi_min = 1/3, n = 100:
        // ln(300) * ln(100) / 0.3.
        let m = stochastic(&[&[0.9, 0.1], &[0.2, 0.8]]);
        let factor = eigengap_rate_factor(&m, 100).unwrap();
        let expected = (300.0f64).ln() * (100.0f64).ln() / 0.3;
        assert!((factor - expected).abs() < 1e-9);
        assert!(eigengap_rate_factor(&m, 1).is_err());
    }

    #[test]
    fn non_reversible_chain_is_rejected() {
        let m = stochastic(&[&[0.1, 0.9, 0.0], &[0.0, 0.1, 0.9], &[0.9, 0.0, 0.1]]);
        match reversible_second_eigenvalue(&m) {
            Err(Error::NotReversible { max_violation }) => assert!(max_violation > 0.1),
            other => panic!("expected reversibility error, got {other:?}"),
        }
    }
}
