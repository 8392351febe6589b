use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::chain::{
    frequency_from_transition, stationary_distribution, FrequencyMatrix, StationaryDistribution,
    StochasticMatrix,
};
use crate::error::{Error, Result};
use crate::spectral::PartitionLabels;
use crate::synth::LowRankFactorization;
use crate::util::mix_seed;

/// A generated chain with everything its structure guarantees: transition and
/// frequency matrices, the stationary distribution, the (numerical) rank, and
/// when applicable the ground-truth partition, a nonnegative factorization,
/// the lumpable splits, and the rescaled subset of the imbalanced recipe.
#[derive(Debug, Clone)]
pub struct GroundTruthChain {
    transition: StochasticMatrix,
    frequency: FrequencyMatrix,
    stationary: StationaryDistribution,
    rank: usize,
    partition: Option<PartitionLabels>,
    factorization: Option<LowRankFactorization>,
    transition_split: Option<(DMatrix<f64>, DMatrix<f64>)>,
    frequency_split: Option<(DMatrix<f64>, DMatrix<f64>)>,
    rescaled_subset: Option<Vec<usize>>,
}

impl GroundTruthChain {
    pub fn transition(&self) -> &StochasticMatrix {
        &self.transition
    }

    pub fn frequency(&self) -> &FrequencyMatrix {
        &self.frequency
    }

    pub fn stationary(&self) -> &StationaryDistribution {
        &self.stationary
    }

    /// Numerical rank of the transition matrix.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn num_states(&self) -> usize {
        self.transition.nrows()
    }

    pub fn partition(&self) -> Option<&PartitionLabels> {
        self.partition.as_ref()
    }

    pub fn factorization(&self) -> Option<&LowRankFactorization> {
        self.factorization.as_ref()
    }

    /// `(P1, P2)` with `P = P1 + P2` and `P1 P2^T = 0`, for lumpable chains.
    pub fn transition_split(&self) -> Option<(&DMatrix<f64>, &DMatrix<f64>)> {
        self.transition_split.as_ref().map(|(a, b)| (a, b))
    }

    /// `(F1, F2)` with `F = F1 + F2`, for lumpable chains.
    pub fn frequency_split(&self) -> Option<(&DMatrix<f64>, &DMatrix<f64>)> {
        self.frequency_split.as_ref().map(|(a, b)| (a, b))
    }

    /// States whose incoming probabilities were damped, for imbalanced chains.
    pub fn rescaled_subset(&self) -> Option<&[usize]> {
        self.rescaled_subset.as_deref()
    }
}

fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let mut sigmas: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sigmas.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let top = sigmas[0];
    sigmas.iter().filter(|&&s| s > 1e-10 * top).count()
}

fn finish_chain(
    transition: StochasticMatrix,
    rank: usize,
    partition: Option<PartitionLabels>,
    factorization: Option<LowRankFactorization>,
    transition_split: Option<(DMatrix<f64>, DMatrix<f64>)>,
    rescaled_subset: Option<Vec<usize>>,
) -> Result<GroundTruthChain> {
    let stationary = stationary_distribution(&transition)?;
    let frequency = frequency_from_transition(&transition, &stationary)?;
    let frequency_split = transition_split.as_ref().map(|(p1, p2)| {
        let mut f1 = p1.clone();
        let mut f2 = p2.clone();
        for i in 0..f1.nrows() {
            let w = stationary.probs()[i];
            f1.row_mut(i).scale_mut(w);
            f2.row_mut(i).scale_mut(w);
        }
        (f1, f2)
    });
    Ok(GroundTruthChain {
        transition,
        frequency,
        stationary,
        rank,
        partition,
        factorization,
        transition_split,
        frequency_split,
        rescaled_subset,
    })
}

const GENERATOR_RETRIES: usize = 10;

/// Rank-`r` chain: absolute-value Gaussian factors multiplied and row
/// normalized. Rank deficiency triggers an internal regeneration, up to ten
/// attempts.
pub fn gen_low_rank_chain(p: usize, r: usize, seed: u64) -> Result<GroundTruthChain> {
    if r < 1 || r > p {
        return Err(Error::InvalidParameter(format!("need 1 <= r <= p, got r={r}, p={p}")));
    }
    for attempt in 0..GENERATOR_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, attempt as u64]));
        let gauss_abs =
            |rng: &mut ChaCha8Rng| -> f64 { rng.sample::<f64, _>(StandardNormal).abs() };
        let u0 = DMatrix::from_fn(p, r, |_, _| gauss_abs(&mut rng));
        let v0 = DMatrix::from_fn(p, r, |_, _| gauss_abs(&mut rng));
        let product = &u0 * v0.transpose();
        let row_sums: Vec<f64> = (0..p).map(|i| product.row(i).sum()).collect();
        if row_sums.iter().any(|&s| s <= 0.0) {
            continue;
        }
        let mut entries = product;
        for i in 0..p {
            entries.row_mut(i).scale_mut(1.0 / row_sums[i]);
        }
        let Ok(transition) = StochasticMatrix::new(entries) else {
            continue;
        };
        if numerical_rank(transition.as_matrix()) != r {
            continue;
        }

        // P = left * right^T with unit-mass right columns:
        // fold the row normalization into the left factor and the column
        // masses of v0 into whichever side keeps right stochastic.
        let col_masses: Vec<f64> = (0..r).map(|k| v0.column(k).sum()).collect();
        if col_masses.iter().any(|&m| m <= 0.0) {
            continue;
        }
        let left = DMatrix::from_fn(p, r, |i, k| u0[(i, k)] * col_masses[k] / row_sums[i]);
        let right = DMatrix::from_fn(p, r, |j, k| v0[(j, k)] / col_masses[k]);
        let Ok(factorization) = LowRankFactorization::new(left, right) else {
            continue;
        };

        return finish_chain(transition, r, None, Some(factorization), None, None);
    }
    Err(Error::GeneratorFailed(format!(
        "no full-rank draw for p={p}, r={r} in {GENERATOR_RETRIES} attempts"
    )))
}

/// Low-rank chain with a damped half of the state space: probabilities from
/// outside the subset into it are divided by `delta` and rows renormalized,
/// shrinking the stationary mass of the subset as `delta` grows.
pub fn gen_imbalanced_chain(p: usize, r: usize, delta: f64, seed: u64) -> Result<GroundTruthChain> {
    if !delta.is_finite() || delta < 1.0 {
        return Err(Error::InvalidParameter(format!("delta must be >= 1, got {delta}")));
    }
    let base = gen_low_rank_chain(p, r, seed)?;

    let mut subset: Vec<usize> = (0..p).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, 0x5b5e7]));
    subset.shuffle(&mut rng);
    subset.truncate(p / 2);
    subset.sort_unstable();

    if delta == 1.0 {
        // The rescale is the identity; keep the base matrices bit-for-bit.
        return Ok(GroundTruthChain { rescaled_subset: Some(subset), ..base });
    }

    let in_subset = {
        let mut mask = vec![false; p];
        for &i in &subset {
            mask[i] = true;
        }
        mask
    };
    let mut entries = base.transition().as_matrix().clone();
    for i in 0..p {
        if in_subset[i] {
            continue;
        }
        for j in 0..p {
            if in_subset[j] {
                entries[(i, j)] /= delta;
            }
        }
        let row_sum: f64 = entries.row(i).sum();
        entries.row_mut(i).scale_mut(1.0 / row_sum);
    }
    let transition = StochasticMatrix::new(entries)?;
    let rank = numerical_rank(transition.as_matrix());
    finish_chain(transition, rank, None, None, None, Some(subset))
}

/// Draws a membership label per state uniformly, rejecting draws that leave a
/// block empty.
fn random_membership(p: usize, r: usize, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    for _ in 0..1000 {
        let labels: Vec<usize> = (0..p).map(|_| rng.gen_range(0..r)).collect();
        let mut seen = vec![false; r];
        for &l in &labels {
            seen[l] = true;
        }
        if seen.iter().all(|&s| s) {
            return Ok(labels);
        }
    }
    Err(Error::GeneratorFailed(format!(
        "could not draw a surjective membership for p={p}, r={r}"
    )))
}

/// Aggregatable chain: states inside a block share one outgoing distribution,
/// so the transition matrix is membership times a stack of `r` random rows.
pub fn gen_aggregatable_chain(p: usize, r: usize, seed: u64) -> Result<GroundTruthChain> {
    if r < 1 || r > p {
        return Err(Error::InvalidParameter(format!("need 1 <= r <= p, got r={r}, p={p}")));
    }
    for attempt in 0..GENERATOR_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, attempt as u64, 0xa66]));
        let labels = random_membership(p, r, &mut rng)?;
        let mut block_rows = DMatrix::from_fn(r, p, |_, _| rng.gen::<f64>());
        for k in 0..r {
            let total: f64 = block_rows.row(k).sum();
            block_rows.row_mut(k).scale_mut(1.0 / total);
        }
        let entries = DMatrix::from_fn(p, p, |i, j| block_rows[(labels[i], j)]);
        let Ok(transition) = StochasticMatrix::new(entries) else {
            continue;
        };
        if numerical_rank(transition.as_matrix()) != r {
            continue;
        }
        let membership = DMatrix::from_fn(p, r, |i, k| f64::from(labels[i] == k));
        let right = block_rows.transpose();
        let Ok(factorization) = LowRankFactorization::new(membership, right) else {
            continue;
        };
        let partition = PartitionLabels::new(labels, r)?;
        return finish_chain(transition, r, Some(partition), Some(factorization), None, None);
    }
    Err(Error::GeneratorFailed(format!(
        "no valid aggregatable draw for p={p}, r={r} in {GENERATOR_RETRIES} attempts"
    )))
}

/// Lumpable chain with a full-rank transition matrix.
///
/// The block-level walk is a diagonally dominant `r x r` stochastic matrix
/// spread uniformly over blocks (`P1`); a dense perturbation with zero block
/// row sums (`P2`, so `P2 Z = 0` and `P1 P2^T = 0`) is added at the largest
/// scale that keeps entries nonnegative and keeps the block dynamics dominant
/// (`sigma_r(F1) > 2 ||F2||`), halving the scale when either check fails.
pub fn gen_lumpable_chain(p: usize, r: usize, seed: u64) -> Result<GroundTruthChain> {
    if r < 1 || 2 * r > p {
        return Err(Error::InvalidParameter(format!("need 1 <= r <= p/2, got r={r}, p={p}")));
    }
    for attempt in 0..GENERATOR_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, attempt as u64, 0x10e]));
        if let Some(chain) = try_lumpable_draw(p, r, &mut rng)? {
            return Ok(chain);
        }
    }
    Err(Error::GeneratorFailed(format!(
        "no identifiable lumpable draw for p={p}, r={r} in {GENERATOR_RETRIES} attempts"
    )))
}

/// One draw of the lumpable recipe. Returns `None` for degenerate draws: a
/// near-singular block structure leaves the partition unidentifiable at any
/// practical sample size, the analogue of a rank-deficient low-rank draw.
fn try_lumpable_draw(p: usize, r: usize, rng: &mut ChaCha8Rng) -> Result<Option<GroundTruthChain>> {
    let labels = random_membership(p, r, rng)?;
    let block_sizes: Vec<usize> = {
        let mut sizes = vec![0usize; r];
        for &l in &labels {
            sizes[l] += 1;
        }
        sizes
    };

    // Block-level stochastic matrix: rows of (I + B) / ||.||_1, B ~ U[0, 1/2].
    let mut block_walk = DMatrix::from_fn(r, r, |i, j| f64::from(i == j) + rng.gen::<f64>() * 0.5);
    for k in 0..r {
        let total: f64 = block_walk.row(k).sum();
        block_walk.row_mut(k).scale_mut(1.0 / total);
    }

    let block_part = DMatrix::from_fn(p, p, |i, j| {
        block_walk[(labels[i], labels[j])] / block_sizes[labels[j]] as f64
    });

    // Dense perturbation with zero row sums over every block.
    let mut perturb = DMatrix::from_fn(p, p, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
    for i in 0..p {
        let mut block_totals = vec![0.0f64; r];
        for j in 0..p {
            block_totals[labels[j]] += perturb[(i, j)];
        }
        for j in 0..p {
            perturb[(i, j)] -= block_totals[labels[j]] / block_sizes[labels[j]] as f64;
        }
    }

    // Largest scale keeping the sum nonnegative, with a safety margin.
    let mut scale = f64::INFINITY;
    for i in 0..p {
        for j in 0..p {
            if perturb[(i, j)] < 0.0 {
                scale = scale.min(block_part[(i, j)] / -perturb[(i, j)]);
            }
        }
    }
    let mut scale = if scale.is_finite() { 0.9 * scale } else { 1.0 };

    for _ in 0..60 {
        let candidate = &block_part + &perturb * scale;
        if candidate.iter().any(|&x| x < 0.0) {
            scale *= 0.5;
            continue;
        }
        let Ok(transition) = StochasticMatrix::new(candidate) else {
            scale *= 0.5;
            continue;
        };
        let Ok(chain) = finish_chain(
            transition,
            0,
            Some(PartitionLabels::new(labels.clone(), r)?),
            None,
            Some((block_part.clone(), &perturb * scale)),
            None,
        ) else {
            scale *= 0.5;
            continue;
        };
        let (f1, f2) = chain.frequency_split().expect("split recorded");
        let mut f1_sigmas: Vec<f64> =
            f1.clone().svd(false, false).singular_values.iter().copied().collect();
        f1_sigmas.sort_by(|a, b| b.partial_cmp(a).unwrap());
        // Identifiability floor: the block directions must not collapse.
        if f1_sigmas[r - 1] < 0.05 * f1_sigmas[0] {
            return Ok(None);
        }
        // Keep the block dynamics leading, so the partition is recoverable.
        let f2_norm = f2.clone().svd(false, false).singular_values.max();
        if f1_sigmas[r - 1] <= 2.0 * f2_norm {
            scale *= 0.5;
            continue;
        }
        let rank = numerical_rank(chain.transition().as_matrix());
        return Ok(Some(GroundTruthChain { rank, ..chain }));
    }
    Err(Error::GeneratorFailed(format!(
        "lumpable perturbation scale search failed for p={p}, r={r}"
    )))
}
