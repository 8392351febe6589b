//! Losses and distances used to evaluate the estimators: entrywise l1, row
//! total-variation aggregates, principal-angle subspace distances,
//! permutation-minimized misclassification, and KL divergence.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::chain::StochasticMatrix;
use crate::error::{Error, Result};
use crate::spectral::PartitionLabels;

/// One row of losses for an estimator on one trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    /// Entrywise l1 distance between frequency matrices; at most 2 for a pair
    /// of probability-mass matrices.
    pub l1_total: f64,
    /// Mean per-row l1 distance between transition matrices.
    pub avg_row_tv: f64,
    /// Largest per-row l1 distance between transition matrices.
    pub max_row_tv: f64,
    /// Spectral-norm principal-angle distance, in [0, 1].
    pub sin_theta_spectral: f64,
    /// Frobenius-norm principal-angle distance, in [0, sqrt(r)].
    pub sin_theta_frobenius: f64,
}

/// Sum of absolute entrywise differences.
pub fn l1_matrix_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension(format!(
            "shape mismatch: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok((a - b).abs().sum())
}

/// `(avg, max)` of the per-row l1 distances between two row-stochastic
/// matrices. Each per-row value is twice the total-variation distance, so it
/// is at most 2.
pub fn row_tv(a: &StochasticMatrix, b: &StochasticMatrix) -> Result<(f64, f64)> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::Dimension(format!(
            "shape mismatch: {}x{} vs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let p = a.nrows();
    let mut sum = 0.0;
    let mut max: f64 = 0.0;
    for i in 0..p {
        let dist: f64 = (a.as_matrix().row(i) - b.as_matrix().row(i)).abs().sum();
        sum += dist;
        max = max.max(dist);
    }
    Ok((sum / p as f64, max))
}

/// Which norm of the principal-angle sine vector to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SinThetaNorm {
    /// Largest sine, i.e. `sqrt(1 - sigma_min^2(U^T V))`.
    Spectral,
    /// Root sum of squared sines, i.e. `sqrt(r - ||U^T V||_F^2)`.
    Frobenius,
}

const ORTHO_TOL: f64 = 1e-8;

/// Principal-angle distance between two orthonormal bases of the same shape.
pub fn sin_theta(u_hat: &DMatrix<f64>, u: &DMatrix<f64>, norm: SinThetaNorm) -> Result<f64> {
    if u_hat.shape() != u.shape() {
        return Err(Error::Dimension(format!(
            "basis shapes differ: {:?} vs {:?}",
            u_hat.shape(),
            u.shape()
        )));
    }
    for (name, m) in [("first", u_hat), ("second", u)] {
        let gram = m.transpose() * m;
        let identity = DMatrix::<f64>::identity(gram.nrows(), gram.ncols());
        let err = (gram - identity).abs().max();
        if err > ORTHO_TOL {
            return Err(Error::InvalidParameter(format!(
                "{name} basis is not orthonormal (deviation {err:.3e})"
            )));
        }
    }
    // The residual of u_hat against the span of u has the principal-angle
    // sines as its singular values; unlike sqrt(1 - cos^2) this loses no
    // precision at small angles.
    let residual = u_hat - u * (u.transpose() * u_hat);
    let value = match norm {
        SinThetaNorm::Spectral => {
            residual.svd(false, false).singular_values.iter().copied().fold(0.0, f64::max).min(1.0)
        }
        SinThetaNorm::Frobenius => residual.norm().min((u.ncols() as f64).sqrt()),
    };
    Ok(value)
}

/// Permutation-minimized misclassification rate between two partitions:
/// the minimum over block permutations of the per-true-block fractions of
/// states that land outside the matched estimated block. Lies in `[0, r]`.
///
/// Uses exhaustive permutation search for `r <= 8` and optimal assignment
/// beyond; both routes are exact.
pub fn misclassification_rate(truth: &PartitionLabels, est: &PartitionLabels) -> Result<f64> {
    let cost = misclassification_costs(truth, est)?;
    let r = cost.len();
    if r <= 8 {
        Ok(assign_exhaustive(&cost))
    } else {
        Ok(assign_hungarian(&cost))
    }
}

/// Brute-force route of the misclassification rate (any `r`, factorial time).
pub fn misclassification_rate_exhaustive(
    truth: &PartitionLabels,
    est: &PartitionLabels,
) -> Result<f64> {
    let cost = misclassification_costs(truth, est)?;
    Ok(assign_exhaustive(&cost))
}

/// Assignment-based route of the misclassification rate (O(r^3)).
pub fn misclassification_rate_assignment(
    truth: &PartitionLabels,
    est: &PartitionLabels,
) -> Result<f64> {
    let cost = misclassification_costs(truth, est)?;
    Ok(assign_hungarian(&cost))
}

/// Cost entry `(j, k)`: fraction of true block `j` not inside estimated
/// block `k`.
fn misclassification_costs(truth: &PartitionLabels, est: &PartitionLabels) -> Result<Vec<Vec<f64>>> {
    if truth.len() != est.len() {
        return Err(Error::LengthMismatch(format!(
            "partitions cover {} and {} states",
            truth.len(),
            est.len()
        )));
    }
    if truth.blocks() != est.blocks() {
        return Err(Error::LengthMismatch(format!(
            "partitions have {} and {} blocks",
            truth.blocks(),
            est.blocks()
        )));
    }
    let r = truth.blocks();
    let mut overlap = vec![vec![0usize; r]; r];
    let mut true_sizes = vec![0usize; r];
    for (i, &tj) in truth.labels().iter().enumerate() {
        true_sizes[tj] += 1;
        overlap[tj][est.labels()[i]] += 1;
    }
    if let Some(j) = true_sizes.iter().position(|&s| s == 0) {
        return Err(Error::UndefinedRate { block: j });
    }
    Ok((0..r)
        .map(|j| (0..r).map(|k| 1.0 - overlap[j][k] as f64 / true_sizes[j] as f64).collect())
        .collect())
}

fn assign_exhaustive(cost: &[Vec<f64>]) -> f64 {
    let r = cost.len();
    let mut perm: Vec<usize> = (0..r).collect();
    let mut best = f64::INFINITY;
    permute(&mut perm, 0, cost, &mut best);
    best
}

fn permute(perm: &mut Vec<usize>, at: usize, cost: &[Vec<f64>], best: &mut f64) {
    if at == perm.len() {
        let total: f64 = perm.iter().enumerate().map(|(j, &k)| cost[j][k]).sum();
        if total < *best {
            *best = total;
        }
        return;
    }
    for i in at..perm.len() {
        perm.swap(at, i);
        permute(perm, at + 1, cost, best);
        perm.swap(at, i);
    }
}

/// Hungarian algorithm (shortest augmenting paths with potentials) for the
/// min-cost perfect assignment on a square cost matrix.
fn assign_hungarian(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    // 1-indexed potentials and matching, the classic compact formulation.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut matched = vec![0usize; n + 1]; // matched[col] = row
    for row in 1..=n {
        let mut links = vec![0usize; n + 1];
        let mut mins = vec![f64::INFINITY; n + 1];
        let mut visited = vec![false; n + 1];
        let mut col = 0usize;
        matched[0] = row;
        loop {
            visited[col] = true;
            let cur_row = matched[col];
            let mut delta = f64::INFINITY;
            let mut next_col = 0usize;
            for c in 1..=n {
                if visited[c] {
                    continue;
                }
                let reduced = cost[cur_row - 1][c - 1] - u[cur_row] - v[c];
                if reduced < mins[c] {
                    mins[c] = reduced;
                    links[c] = col;
                }
                if mins[c] < delta {
                    delta = mins[c];
                    next_col = c;
                }
            }
            for c in 0..=n {
                if visited[c] {
                    u[matched[c]] += delta;
                    v[c] -= delta;
                } else {
                    mins[c] -= delta;
                }
            }
            col = next_col;
            if matched[col] == 0 {
                break;
            }
        }
        while col != 0 {
            let prev = links[col];
            matched[col] = matched[prev];
            col = prev;
        }
    }
    let mut total = 0.0;
    for c in 1..=n {
        if matched[c] != 0 {
            total += cost[matched[c] - 1][c - 1];
        }
    }
    total
}

/// KL divergence between two probability vectors, with `0 log 0 = 0`.
///
/// Returns `f64::INFINITY` when the second argument has a zero where the
/// first has mass; estimators can produce such zeros legitimately, so this is
/// a distinguished value rather than an error.
pub fn kl_row_divergence(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Dimension(format!(
            "vectors have lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    for (name, x) in [("first", u), ("second", v)] {
        let total: f64 = x.iter().sum();
        if (total - 1.0).abs() > 1e-8 || x.iter().any(|&e| e < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{name} argument is not a probability vector"
            )));
        }
    }
    let mut acc = 0.0;
    for (&ui, &vi) in u.iter().zip(v) {
        if ui > 0.0 {
            if vi <= 0.0 {
                return Ok(f64::INFINITY);
            }
            acc += ui * (ui / vi).ln();
        }
    }
    Ok(acc.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn stochastic(rows: &[&[f64]]) -> StochasticMatrix {
        StochasticMatrix::new(DMatrix::from_row_iterator(
            rows.len(),
            rows[0].len(),
            rows.iter().flat_map(|r| r.iter().copied()),
        ))
        .unwrap()
    }

    fn labels(l: &[usize], r: usize) -> PartitionLabels {
        PartitionLabels::new(l.to_vec(), r).unwrap()
    }

    #[test]
    fn l1_distance_basics() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(l1_matrix_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(l1_matrix_distance(&a, &b).unwrap(), 4.0);
        assert!(l1_matrix_distance(&a, &DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn row_tv_single_row_swap() {
        let a = stochastic(&[&[1.0, 0.0], &[0.5, 0.5], &[0.5, 0.5], &[0.5, 0.5]]);
        let b = stochastic(&[&[0.0, 1.0], &[0.5, 0.5], &[0.5, 0.5], &[0.5, 0.5]]);
        let (avg, max) = row_tv(&a, &b).unwrap();
        assert!((avg - 0.5).abs() < 1e-15);
        assert!((max - 2.0).abs() < 1e-15);
    }

    #[test]
    fn row_tv_uniform_vs_point_mass() {
        let a = stochastic(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let b = stochastic(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let (avg, max) = row_tv(&a, &b).unwrap();
        assert!((avg - 1.0).abs() < 1e-15);
        assert!((max - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sin_theta_identical_and_orthogonal() {
        let u = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let w = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        assert_eq!(sin_theta(&u, &u, SinThetaNorm::Spectral).unwrap(), 0.0);
        assert!((sin_theta(&u, &w, SinThetaNorm::Spectral).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sin_theta_planted_thirty_degrees() {
        let angle = 30f64.to_radians();
        let u = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let rotated = DMatrix::from_column_slice(2, 1, &[angle.cos(), angle.sin()]);
        for norm in [SinThetaNorm::Spectral, SinThetaNorm::Frobenius] {
            assert!((sin_theta(&rotated, &u, norm).unwrap() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn sin_theta_is_symmetric_and_rotation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let raw = DMatrix::from_fn(6, 2, |_, _| rng.gen::<f64>() - 0.5);
        let q = raw.clone().qr().q();
        let raw2 = DMatrix::from_fn(6, 2, |_, _| rng.gen::<f64>() - 0.5);
        let q2 = raw2.qr().q();
        let ab = sin_theta(&q, &q2, SinThetaNorm::Frobenius).unwrap();
        let ba = sin_theta(&q2, &q, SinThetaNorm::Frobenius).unwrap();
        assert!((ab - ba).abs() < 1e-12);

        // Right-multiplying by an orthogonal 2x2 matrix leaves the subspace alone.
        let theta = 0.83f64;
        let rot = DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()]);
        let q_rot = &q * rot;
        let drift = sin_theta(&q, &q_rot, SinThetaNorm::Frobenius).unwrap();
        assert!(drift < 1e-10);

        assert!(sin_theta(&raw, &q, SinThetaNorm::Spectral).is_err());
    }

    #[test]
    fn misclassification_hand_example() {
        // Truth {0,1} | {2,3}; estimate {0,1,2} | {3}: identity permutation
        // costs 0 + 1/2, the swap costs 1 + 1/2.
        let truth = labels(&[0, 0, 1, 1], 2);
        let est = labels(&[0, 0, 0, 1], 2);
        assert_eq!(misclassification_rate(&truth, &est).unwrap(), 0.5);
        assert_eq!(misclassification_rate(&truth, &truth).unwrap(), 0.0);
        let swapped = labels(&[1, 1, 0, 0], 2);
        assert_eq!(misclassification_rate(&truth, &swapped).unwrap(), 0.0);
    }

    #[test]
    fn misclassification_empty_true_block_is_undefined() {
        let truth = labels(&[0, 0, 0], 2);
        let est = labels(&[0, 1, 0], 2);
        assert!(matches!(
            misclassification_rate(&truth, &est),
            Err(Error::UndefinedRate { block: 1 })
        ));
    }

    #[test]
    fn exhaustive_and_assignment_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..100 {
            let r = rng.gen_range(2..=6);
            let n = rng.gen_range(r..30);
            let mut t: Vec<usize> = (0..r).collect();
            let mut e: Vec<usize> = (0..r).collect();
            for _ in r..n {
                t.push(rng.gen_range(0..r));
                e.push(rng.gen_range(0..r));
            }
            let truth = labels(&t, r);
            let est = labels(&e, r);
            let brute = misclassification_rate_exhaustive(&truth, &est).unwrap();
            let assigned = misclassification_rate_assignment(&truth, &est).unwrap();
            assert!((brute - assigned).abs() < 1e-12, "{brute} vs {assigned}");
            assert!((0.0..=r as f64).contains(&assigned));
        }
    }

    #[test]
    fn kl_basics_and_support() {
        assert_eq!(kl_row_divergence(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        let v = kl_row_divergence(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-15);
        assert_eq!(kl_row_divergence(&[0.5, 0.5], &[1.0, 0.0]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn kl_l2_sandwich_on_random_bounded_pairs() {
        // For entries confined to [a, b] the divergence is squeezed between
        // (a / 2b^2) and (b / 2a^2) times the squared l2 distance.
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let p = 6;
        for _ in 0..100 {
            let draw = |rng: &mut ChaCha8Rng| {
                let raw: Vec<f64> = (0..p).map(|_| 0.5 + rng.gen::<f64>()).collect();
                let total: f64 = raw.iter().sum();
                raw.into_iter().map(|x| x / total).collect::<Vec<f64>>()
            };
            let u = draw(&mut rng);
            let v = draw(&mut rng);
            let a = u.iter().chain(&v).copied().fold(f64::INFINITY, f64::min);
            let b = u.iter().chain(&v).copied().fold(0.0, f64::max);
            let l2_sq: f64 = u.iter().zip(&v).map(|(x, y)| (x - y) * (x - y)).sum();
            let kl = kl_row_divergence(&u, &v).unwrap();
            assert!(kl >= a / (2.0 * b * b) * l2_sq - 1e-12);
            assert!(kl <= b / (2.0 * a * a) * l2_sq + 1e-12);
        }
    }

    #[test]
    fn sin_theta_norm_hierarchy() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let raw = DMatrix::from_fn(8, 3, |_, _| rng.gen::<f64>() - 0.5);
        let q = raw.qr().q();
        let raw2 = DMatrix::from_fn(8, 3, |_, _| rng.gen::<f64>() - 0.5);
        let q2 = raw2.qr().q();
        let spec = sin_theta(&q, &q2, SinThetaNorm::Spectral).unwrap();
        let frob = sin_theta(&q, &q2, SinThetaNorm::Frobenius).unwrap();
        assert!(spec <= 1.0 + 1e-12);
        assert!(frob <= 3f64.sqrt() + 1e-12);
        assert!(spec <= frob + 1e-12);
    }
}
