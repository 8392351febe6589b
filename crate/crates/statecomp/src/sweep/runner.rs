use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{empirical_frequency, empirical_transition, simulate_trajectory, StartState};
use crate::error::Result;
use crate::metrics::{l1_matrix_distance, misclassification_rate, row_tv, sin_theta, LossReport, SinThetaNorm};
use crate::spectral::{
    aggregation_from_transition, estimate_low_rank_from_matrix, leading_subspaces_from_matrices,
    lumpable_from_frequency, FeatureSubspaces, KMeansConfig,
};
use crate::sweep::{sample_size_for, GeneratorSpec, StartMode, SweepConfig};
use crate::synth::{
    gen_aggregatable_chain, gen_imbalanced_chain, gen_low_rank_chain, gen_lumpable_chain,
    GroundTruthChain,
};
use crate::util::mix_seed;

/// Which estimator a record describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    /// Raw counting estimators.
    Empirical,
    /// Truncated-SVD estimators.
    Spectral,
}

impl EstimatorKind {
    pub fn label(&self) -> &'static str {
        match self {
            EstimatorKind::Empirical => "empirical",
            EstimatorKind::Spectral => "spectral",
        }
    }
}

/// Principal-angle losses of all four estimated feature subspaces against the
/// exact ones, in both norms. Attached to the empirical record, since all
/// four are functions of the empirical matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubspaceReport {
    pub u_f_spectral: f64,
    pub u_f_frobenius: f64,
    pub v_f_spectral: f64,
    pub v_f_frobenius: f64,
    pub u_p_spectral: f64,
    pub u_p_frobenius: f64,
    pub v_p_spectral: f64,
    pub v_p_frobenius: f64,
}

/// One (cell, trial, estimator) measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub generator: String,
    pub p: usize,
    pub r: usize,
    pub k: u32,
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub estimator: EstimatorKind,
    pub losses: LossReport,
    /// Present on empirical records.
    pub subspaces: Option<SubspaceReport>,
    /// Present on spectral records when the generator carries a partition.
    pub misclassification: Option<f64>,
    /// Wall time of the whole trial; excluded from serialized outputs so
    /// reruns stay byte-identical.
    #[serde(skip)]
    pub wall_secs: f64,
}

/// A trial that errored instead of producing records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub p: usize,
    pub k: u32,
    pub trial: usize,
    pub message: String,
}

/// All records of a sweep, plus any per-trial failures.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub records: Vec<SweepRecord>,
    pub failures: Vec<FailureRecord>,
    /// Cells `(p, k)` where more than 10% of trials failed.
    pub degraded_cells: Vec<(usize, u32)>,
}

impl SweepResult {
    /// True when any cell crossed the failure threshold.
    pub fn is_degraded(&self) -> bool {
        !self.degraded_cells.is_empty()
    }

    /// Long-format CSV: one loss value per row, deterministic ordering and
    /// formatting.
    pub fn to_long_csv(&self) -> String {
        let mut out = String::from("generator,p,r,k,n,trial,seed,estimator,metric,value\n");
        for rec in &self.records {
            let mut push = |metric: &str, value: f64| {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    rec.generator,
                    rec.p,
                    rec.r,
                    rec.k,
                    rec.n,
                    rec.trial,
                    rec.seed,
                    rec.estimator.label(),
                    metric,
                    value
                ));
            };
            push("l1_total", rec.losses.l1_total);
            push("avg_row_tv", rec.losses.avg_row_tv);
            push("max_row_tv", rec.losses.max_row_tv);
            push("sin_theta_spectral", rec.losses.sin_theta_spectral);
            push("sin_theta_frobenius", rec.losses.sin_theta_frobenius);
            if let Some(s) = rec.subspaces {
                push("sin_theta_u_f_spectral", s.u_f_spectral);
                push("sin_theta_u_f_frobenius", s.u_f_frobenius);
                push("sin_theta_v_f_spectral", s.v_f_spectral);
                push("sin_theta_v_f_frobenius", s.v_f_frobenius);
                push("sin_theta_u_p_spectral", s.u_p_spectral);
                push("sin_theta_u_p_frobenius", s.u_p_frobenius);
                push("sin_theta_v_p_spectral", s.v_p_spectral);
                push("sin_theta_v_p_frobenius", s.v_p_frobenius);
            }
            if let Some(m) = rec.misclassification {
                push("misclassification", m);
            }
        }
        out
    }
}

fn generate(spec: GeneratorSpec, p: usize, r: usize, seed: u64) -> Result<GroundTruthChain> {
    match spec {
        GeneratorSpec::LowRank => gen_low_rank_chain(p, r, seed),
        GeneratorSpec::Imbalanced { delta } => gen_imbalanced_chain(p, r, delta, seed),
        GeneratorSpec::Aggregatable => gen_aggregatable_chain(p, r, seed),
        GeneratorSpec::Lumpable => gen_lumpable_chain(p, r, seed),
    }
}

/// Runs every (cell, trial) of the config, in parallel, and merges records in
/// a fixed order. The trial seed is a hash of the base seed, the cell, and
/// the trial index, so results are independent of scheduling.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let tasks: Vec<(usize, u32, usize)> = config
        .p_values
        .iter()
        .flat_map(|&p| {
            config.k_values.iter().flat_map(move |&k| {
                (0..config.trials).map(move |t| (p, k, t))
            })
        })
        .collect();

    let outcomes: Vec<std::result::Result<Vec<SweepRecord>, FailureRecord>> = tasks
        .par_iter()
        .map(|&(p, k, trial)| {
            run_trial(config, p, k, trial).map_err(|e| FailureRecord {
                p,
                k,
                trial,
                message: e.to_string(),
            })
        })
        .collect();

    let mut records = Vec::with_capacity(tasks.len() * 2);
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(mut recs) => records.append(&mut recs),
            Err(failure) => failures.push(failure),
        }
    }

    let mut degraded_cells = Vec::new();
    for &p in &config.p_values {
        for &k in &config.k_values {
            let failed = failures.iter().filter(|f| f.p == p && f.k == k).count();
            if failed * 10 > config.trials {
                degraded_cells.push((p, k));
            }
        }
    }

    Ok(SweepResult { config: config.clone(), records, failures, degraded_cells })
}

fn trial_seed(config: &SweepConfig, p: usize, k: u32, trial: usize) -> u64 {
    mix_seed(&[
        config.base_seed,
        config.generator.id(),
        p as u64,
        config.r as u64,
        k as u64,
        trial as u64,
    ])
}

fn run_trial(config: &SweepConfig, p: usize, k: u32, trial: usize) -> Result<Vec<SweepRecord>> {
    let started = Instant::now();
    let r = config.r;
    let n = sample_size_for(k, p, r, config.n_formula);
    let seed = trial_seed(config, p, k, trial);
    let truth = generate(config.generator, p, r, mix_seed(&[seed, 1]))?;

    let start = match config.start_mode {
        StartMode::FixedState => StartState::Fixed(0),
        StartMode::StationaryDraw => StartState::Draw(truth.stationary().probs().to_vec()),
    };
    let traj = simulate_trajectory(truth.transition(), start, n, mix_seed(&[seed, 2]))?;

    let f_tilde = empirical_frequency(&traj)?;
    let p_tilde = empirical_transition(&traj)?;
    let estimate = estimate_low_rank_from_matrix(&f_tilde, r)?;

    let truth_subspaces =
        leading_subspaces_from_matrices(truth.frequency(), truth.transition(), r)?;
    let est_subspaces = leading_subspaces_from_matrices(&f_tilde, &p_tilde, r)?;
    let subspace_report = subspace_losses(&est_subspaces, &truth_subspaces)?;

    let f = truth.frequency().as_matrix();
    let (emp_avg_tv, emp_max_tv) = row_tv(&p_tilde, truth.transition())?;
    let empirical_losses = LossReport {
        l1_total: l1_matrix_distance(f_tilde.as_matrix(), f)?,
        avg_row_tv: emp_avg_tv,
        max_row_tv: emp_max_tv,
        sin_theta_spectral: subspace_report.u_f_spectral,
        sin_theta_frobenius: subspace_report.u_f_frobenius,
    };
    let (spec_avg_tv, spec_max_tv) = row_tv(&estimate.p_hat, truth.transition())?;
    let spectral_losses = LossReport {
        l1_total: l1_matrix_distance(estimate.f_hat.as_matrix(), f)?,
        avg_row_tv: spec_avg_tv,
        max_row_tv: spec_max_tv,
        sin_theta_spectral: subspace_report.u_p_spectral,
        sin_theta_frobenius: subspace_report.u_p_frobenius,
    };

    let misclassification = match (config.generator, truth.partition()) {
        (GeneratorSpec::Aggregatable, Some(truth_labels)) => {
            let km = KMeansConfig {
                restarts: config.kmeans_restarts,
                seed: mix_seed(&[seed, 3]),
                ..KMeansConfig::default()
            };
            let labels = aggregation_from_transition(&p_tilde, r, &km)?;
            Some(misclassification_rate(truth_labels, &labels)?)
        }
        (GeneratorSpec::Lumpable, Some(truth_labels)) => {
            let km = KMeansConfig {
                restarts: config.kmeans_restarts,
                seed: mix_seed(&[seed, 3]),
                ..KMeansConfig::default()
            };
            let labels = lumpable_from_frequency(&f_tilde, r, &km)?;
            Some(misclassification_rate(truth_labels, &labels)?)
        }
        _ => None,
    };

    let wall_secs = started.elapsed().as_secs_f64();
    let base = |estimator: EstimatorKind, losses: LossReport| SweepRecord {
        generator: config.generator.label().to_string(),
        p,
        r,
        k,
        n,
        trial,
        seed,
        estimator,
        losses,
        subspaces: None,
        misclassification: None,
        wall_secs,
    };
    let mut empirical = base(EstimatorKind::Empirical, empirical_losses);
    empirical.subspaces = Some(subspace_report);
    let mut spectral = base(EstimatorKind::Spectral, spectral_losses);
    spectral.misclassification = misclassification;
    Ok(vec![empirical, spectral])
}

fn subspace_losses(
    est: &FeatureSubspaces,
    truth: &FeatureSubspaces,
) -> Result<SubspaceReport> {
    let pair = |a: &crate::spectral::SubspaceBasis, b: &crate::spectral::SubspaceBasis| -> Result<(f64, f64)> {
        Ok((
            sin_theta(a.matrix(), b.matrix(), SinThetaNorm::Spectral)?,
            sin_theta(a.matrix(), b.matrix(), SinThetaNorm::Frobenius)?,
        ))
    };
    let (u_f_spectral, u_f_frobenius) = pair(&est.u_f, &truth.u_f)?;
    let (v_f_spectral, v_f_frobenius) = pair(&est.v_f, &truth.v_f)?;
    let (u_p_spectral, u_p_frobenius) = pair(&est.u_p, &truth.u_p)?;
    let (v_p_spectral, v_p_frobenius) = pair(&est.v_p, &truth.v_p)?;
    Ok(SubspaceReport {
        u_f_spectral,
        u_f_frobenius,
        v_f_spectral,
        v_f_frobenius,
        u_p_spectral,
        u_p_frobenius,
        v_p_spectral,
        v_p_frobenius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> SweepConfig {
        SweepConfig {
            generator: GeneratorSpec::LowRank,
            p_values: vec![20],
            r: 2,
            k_values: vec![2],
            trials: 1,
            base_seed: 7,
            start_mode: StartMode::StationaryDraw,
            kmeans_restarts: 5,
            n_formula: Default::default(),
        }
    }

    #[test]
    fn single_cell_single_trial_yields_two_records() {
        let result = run_sweep(&tiny_config()).unwrap();
        assert_eq!(result.records.len(), 2);
        assert_eq!(result.records[0].estimator, EstimatorKind::Empirical);
        assert_eq!(result.records[1].estimator, EstimatorKind::Spectral);
        assert!(result.records[0].subspaces.is_some());
        assert!(result.records[1].subspaces.is_none());
        assert!(result.failures.is_empty());
        assert!(!result.is_degraded());
    }

    #[test]
    fn reruns_are_byte_identical() {
        let a = run_sweep(&tiny_config()).unwrap().to_long_csv();
        let b = run_sweep(&tiny_config()).unwrap().to_long_csv();
        assert_eq!(a, b);
    }

    #[test]
    fn lumpable_sweeps_record_misclassification() {
        let config = SweepConfig {
            generator: GeneratorSpec::Lumpable,
            p_values: vec![20],
            r: 2,
            k_values: vec![4],
            trials: 2,
            base_seed: 3,
            start_mode: StartMode::StationaryDraw,
            kmeans_restarts: 5,
            n_formula: Default::default(),
        };
        let result = run_sweep(&config).unwrap();
        let spectral: Vec<_> =
            result.records.iter().filter(|r| r.estimator == EstimatorKind::Spectral).collect();
        assert_eq!(spectral.len(), 2);
        assert!(spectral.iter().all(|r| r.misclassification.is_some()));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut config = tiny_config();
        config.k_values = vec![0];
        assert!(run_sweep(&config).is_err());
    }
}
