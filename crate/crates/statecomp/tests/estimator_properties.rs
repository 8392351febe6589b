//! Structural properties of the spectral estimators: best-rank-r optimality,
//! subspace consistency on exact inputs, and the block geometry that makes
//! aggregation recoverable.

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use statecomp::chain::{simulate_trajectory, StartState, StochasticMatrix, Trajectory};
use statecomp::metrics::{misclassification_rate, row_tv, sin_theta, SinThetaNorm};
use statecomp::spectral::{
    estimate_low_rank, estimate_rectangular, leading_subspaces_from_matrices, truncated_svd,
};

#[test]
fn truncation_beats_sampled_rank_r_candidates() {
    // Sampled oracle: no random rank-r matrix of comparable scale comes
    // closer to the empirical matrix in Frobenius norm than the truncation.
    let truth = statecomp::synth::gen_low_rank_chain(15, 3, 60).unwrap();
    let traj = simulate_trajectory(truth.transition(), StartState::Fixed(0), 5_000, 3).unwrap();
    let est = estimate_low_rank(&traj, 3).unwrap();
    let f_tilde = statecomp::chain::empirical_frequency(&traj).unwrap();
    let best = (f_tilde.as_matrix() - &est.f0).norm();

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let scale = est.f0.norm();
    for _ in 0..200 {
        let a = DMatrix::from_fn(15, 3, |_, _| rng.gen::<f64>() - 0.5);
        let b = DMatrix::from_fn(3, 15, |_, _| rng.gen::<f64>() - 0.5);
        let mut candidate = a * b;
        let norm = candidate.norm();
        if norm > 0.0 {
            candidate.scale_mut(scale / norm);
        }
        let dist = (f_tilde.as_matrix() - &candidate).norm();
        assert!(best <= dist + 1e-12, "candidate beat the truncation: {dist} < {best}");
    }
}

#[test]
fn all_four_subspaces_are_exact_on_rank_r_inputs() {
    let truth = statecomp::synth::gen_low_rank_chain(25, 3, 8).unwrap();
    let spaces =
        leading_subspaces_from_matrices(truth.frequency(), truth.transition(), 3).unwrap();
    let again = leading_subspaces_from_matrices(truth.frequency(), truth.transition(), 3).unwrap();
    for (a, b) in [
        (&spaces.u_f, &again.u_f),
        (&spaces.v_f, &again.v_f),
        (&spaces.u_p, &again.u_p),
        (&spaces.v_p, &again.v_p),
    ] {
        for norm in [SinThetaNorm::Spectral, SinThetaNorm::Frobenius] {
            assert!(sin_theta(a.matrix(), b.matrix(), norm).unwrap() < 1e-10);
        }
    }
}

#[test]
fn aggregatable_left_features_have_the_predicted_block_geometry() {
    // Within a block the rows of the left singular factor coincide; across
    // blocks their distance is exactly sqrt(1/|block_k| + 1/|block_l|).
    let truth = statecomp::synth::gen_aggregatable_chain(40, 4, 12).unwrap();
    let labels = truth.partition().unwrap().labels();
    let svd = truncated_svd(truth.transition().as_matrix(), 4).unwrap();
    let u = svd.u();
    let sizes = {
        let mut s = vec![0usize; 4];
        for &l in labels {
            s[l] += 1;
        }
        s
    };
    let row_dist = |i: usize, j: usize| -> f64 {
        (0..4).map(|c| (u[(i, c)] - u[(j, c)]).powi(2)).sum::<f64>().sqrt()
    };
    let mut max_within: f64 = 0.0;
    let mut min_cross = f64::INFINITY;
    let mut min_cross_expected = f64::INFINITY;
    for i in 0..40 {
        for j in (i + 1)..40 {
            let d = row_dist(i, j);
            if labels[i] == labels[j] {
                max_within = max_within.max(d);
            } else {
                min_cross = min_cross.min(d);
                let expected =
                    (1.0 / sizes[labels[i]] as f64 + 1.0 / sizes[labels[j]] as f64).sqrt();
                min_cross_expected = min_cross_expected.min(expected);
            }
        }
    }
    assert!(max_within < 1e-10, "within-block spread {max_within}");
    assert!(
        min_cross >= min_cross_expected - 1e-10,
        "cross-block gap {min_cross} below {min_cross_expected}"
    );
}

#[test]
fn rectangular_estimator_recovers_a_planted_rank_two_policy() {
    // Rank-2 conditional matrix: every row is a mixture of two fixed
    // distributions; the x-stream is an iid uniform walk (mixing time 1).
    let (p, q) = (50, 50);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let draw_dist = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let raw: Vec<f64> = (0..q).map(|_| rng.gen::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / total).collect()
    };
    let a = draw_dist(&mut rng);
    let b = draw_dist(&mut rng);
    let mixes: Vec<f64> = (0..p).map(|_| rng.gen::<f64>()).collect();
    let q_truth = DMatrix::from_fn(p, q, |i, j| mixes[i] * a[j] + (1.0 - mixes[i]) * b[j]);

    let cumulative: Vec<Vec<f64>> = (0..p)
        .map(|i| {
            let mut acc = 0.0;
            (0..q)
                .map(|j| {
                    acc += q_truth[(i, j)];
                    acc
                })
                .collect()
        })
        .collect();
    let mut pairs = Vec::with_capacity(100_000);
    for _ in 0..100_000 {
        let x = rng.gen_range(0..p);
        let u: f64 = rng.gen();
        let y = cumulative[x].iter().position(|&c| u < c).unwrap_or(q - 1);
        pairs.push((x, y));
    }

    let est = estimate_rectangular(&pairs, p, q, 2).unwrap();
    let truth_matrix = StochasticMatrix::new(q_truth).unwrap();
    let (avg_l1, _) = row_tv(&est.q_hat, &truth_matrix).unwrap();
    assert!(avg_l1 / 2.0 < 0.1, "avg row TV {}", avg_l1 / 2.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn empirical_transition_rows_always_sum_to_one(
        states in prop::collection::vec(0usize..6, 2..60),
    ) {
        let traj = Trajectory::new(states, 6).unwrap();
        let p_tilde = statecomp::chain::empirical_transition(&traj).unwrap();
        for i in 0..6 {
            let sum: f64 = p_tilde.row(i).iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
        }
        let f_tilde = statecomp::chain::empirical_frequency(&traj).unwrap();
        prop_assert!((f_tilde.as_matrix().sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn misclassification_is_invariant_under_relabeling(
        labels in prop::collection::vec(0usize..3, 3..40),
        perm_seed in 0u64..1000,
    ) {
        let mut covered = labels.clone();
        covered[0] = 0;
        covered[1] = 1;
        covered[2] = 2;
        let truth = statecomp::spectral::PartitionLabels::new(covered.clone(), 3).unwrap();
        let mut perm = [0usize, 1, 2];
        let mut rng = ChaCha8Rng::seed_from_u64(perm_seed);
        for i in (1..3).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let relabeled: Vec<usize> = covered.iter().map(|&l| perm[l]).collect();
        let est = statecomp::spectral::PartitionLabels::new(relabeled, 3).unwrap();
        let rate = misclassification_rate(&truth, &est).unwrap();
        prop_assert!(rate.abs() < 1e-12);
    }
}
