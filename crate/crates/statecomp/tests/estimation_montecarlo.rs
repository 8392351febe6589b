//! Long-run consistency of the counting estimators against known chains.

use nalgebra::DMatrix;
use statecomp::chain::{
    empirical_distribution, empirical_frequency, empirical_transition, frequency_from_transition,
    simulate_trajectory, stationary_distribution, StartState, StochasticMatrix,
};
use statecomp::metrics::{l1_matrix_distance, row_tv};

fn two_state_chain() -> StochasticMatrix {
    StochasticMatrix::new(DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.2, 0.8])).unwrap()
}

#[test]
fn empirical_frequency_converges_to_the_truth() {
    let p = two_state_chain();
    let pi = stationary_distribution(&p).unwrap();
    let f = frequency_from_transition(&p, &pi).unwrap();
    let traj = simulate_trajectory(&p, StartState::Fixed(0), 100_000, 31).unwrap();
    let f_tilde = empirical_frequency(&traj).unwrap();
    let err = l1_matrix_distance(f_tilde.as_matrix(), f.as_matrix()).unwrap();
    assert!(err < 0.05, "l1 error {err}");
}

#[test]
fn empirical_transition_converges_in_row_tv() {
    let p = two_state_chain();
    let traj = simulate_trajectory(&p, StartState::Fixed(0), 100_000, 32).unwrap();
    let p_tilde = empirical_transition(&traj).unwrap();
    let (_, max_l1) = row_tv(&p_tilde, &p).unwrap();
    assert!(max_l1 / 2.0 < 0.05, "max row TV {}", max_l1 / 2.0);
}

#[test]
fn empirical_distribution_converges_in_sup_norm() {
    let p = two_state_chain();
    let pi = stationary_distribution(&p).unwrap();
    let traj = simulate_trajectory(&p, StartState::Fixed(0), 100_000, 33).unwrap();
    let pi_tilde = empirical_distribution(&traj).unwrap();
    let err = pi_tilde
        .iter()
        .zip(pi.probs())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(err < 0.02, "sup error {err}");
}

#[test]
fn million_step_run_pins_the_frequency_matrix_entrywise() {
    let p = two_state_chain();
    let pi = stationary_distribution(&p).unwrap();
    let f = frequency_from_transition(&p, &pi).unwrap();
    let traj = simulate_trajectory(&p, StartState::Fixed(0), 1_000_000, 7).unwrap();
    let f_tilde = empirical_frequency(&traj).unwrap();
    let max_dev = (f_tilde.as_matrix() - f.as_matrix()).abs().max();
    assert!(max_dev < 0.01, "entrywise deviation {max_dev}");
}

#[test]
fn losses_fall_as_the_sample_grows_tenfold() {
    let truth = statecomp::synth::gen_low_rank_chain(30, 2, 4).unwrap();
    let f = truth.frequency().as_matrix();
    let mean_loss = |n: usize| -> f64 {
        (0..20)
            .map(|seed| {
                let traj = simulate_trajectory(
                    truth.transition(),
                    StartState::Fixed(0),
                    n,
                    1000 + seed,
                )
                .unwrap();
                let f_tilde = empirical_frequency(&traj).unwrap();
                l1_matrix_distance(f_tilde.as_matrix(), f).unwrap()
            })
            .sum::<f64>()
            / 20.0
    };
    let at_1k = mean_loss(1_000);
    let at_10k = mean_loss(10_000);
    let at_100k = mean_loss(100_000);
    assert!(at_10k < at_1k, "{at_10k} !< {at_1k}");
    assert!(at_100k < at_10k, "{at_100k} !< {at_10k}");
}

#[test]
fn stationary_residual_oracle_on_generated_chains() {
    for seed in 0..10 {
        let truth = statecomp::synth::gen_low_rank_chain(40, 3, seed).unwrap();
        assert!(truth.stationary().residual(truth.transition()) < 1e-10);
    }
}

#[test]
fn full_scale_low_rank_chain_is_valid_and_rank_three() {
    let truth = statecomp::synth::gen_low_rank_chain(200, 3, 17).unwrap();
    let report =
        statecomp::chain::validate_transition(truth.transition().as_matrix()).unwrap();
    assert!(report.is_stochastic && report.is_ergodic_class);
    let mut sigmas: Vec<f64> = truth
        .transition()
        .as_matrix()
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sigmas.sort_by(|a, b| b.partial_cmp(a).unwrap());
    assert!(sigmas[3] / sigmas[2] < 1e-10, "sigma_4/sigma_3 = {}", sigmas[3] / sigmas[2]);
    assert!(truth.stationary().residual(truth.transition()) < 1e-10);
}
