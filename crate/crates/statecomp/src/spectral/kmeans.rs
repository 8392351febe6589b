use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spectral::PartitionLabels;
use crate::util::mix_seed;

/// Settings for the k-means engine shared by the partition estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    /// Independent k-means++ restarts; the lowest-inertia run wins.
    pub restarts: usize,
    /// Lloyd iteration cap per restart.
    pub max_iters: usize,
    /// Stop a restart when the inertia improvement falls below this.
    pub tol: f64,
    /// Base seed; restart `i` uses a seed derived from `(seed, i)`, so results
    /// do not depend on restart scheduling.
    pub seed: u64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self { restarts: 20, max_iters: 100, tol: 1e-8, seed: 0 }
    }
}

/// Clusters the rows of an `m x d` matrix into `r` blocks with k-means++
/// seeding and Lloyd iterations, deterministic given the config seed.
pub fn kmeans(rows: &DMatrix<f64>, r: usize, config: &KMeansConfig) -> Result<PartitionLabels> {
    let m = rows.nrows();
    if r == 0 || r > m {
        return Err(Error::InvalidParameter(format!(
            "cannot split {m} rows into {r} blocks"
        )));
    }
    if config.restarts == 0 {
        return Err(Error::InvalidParameter("restarts must be >= 1".into()));
    }

    let mut best: Option<(Vec<usize>, f64)> = None;
    for restart in 0..config.restarts {
        let seed = mix_seed(&[config.seed, restart as u64]);
        let (labels, inertia, _) = lloyd(rows, r, config, seed);
        let better = match &best {
            None => true,
            Some((_, best_inertia)) => inertia < *best_inertia,
        };
        if better {
            best = Some((labels, inertia));
        }
    }
    let (labels, _) = best.expect("at least one restart ran");
    PartitionLabels::new(labels, r)
}

/// One seeded k-means++ / Lloyd run. Returns labels, final inertia, and the
/// inertia after every iteration (used to test monotonicity).
fn lloyd(
    rows: &DMatrix<f64>,
    r: usize,
    config: &KMeansConfig,
    seed: u64,
) -> (Vec<usize>, f64, Vec<f64>) {
    let m = rows.nrows();
    let d = rows.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut centers = plus_plus_init(rows, r, &mut rng);
    let mut labels = vec![0usize; m];
    let mut history = Vec::new();
    let mut prev_inertia = f64::INFINITY;

    for _ in 0..config.max_iters {
        // Assignment: nearest center, ties to the lowest index.
        for i in 0..m {
            let mut best_c = 0usize;
            let mut best_d = sq_dist(rows, i, &centers, 0, d);
            for c in 1..r {
                let dist = sq_dist(rows, i, &centers, c, d);
                if dist < best_d {
                    best_d = dist;
                    best_c = c;
                }
            }
            labels[i] = best_c;
        }

        repair_empty_clusters(rows, &mut labels, &centers, r);

        // Update step: centers become cluster means.
        let mut counts = vec![0usize; r];
        centers.fill(0.0);
        for i in 0..m {
            counts[labels[i]] += 1;
            for j in 0..d {
                centers[(labels[i], j)] += rows[(i, j)];
            }
        }
        for c in 0..r {
            if counts[c] > 0 {
                let scale = 1.0 / counts[c] as f64;
                centers.row_mut(c).scale_mut(scale);
            }
        }

        let inertia: f64 = (0..m).map(|i| sq_dist(rows, i, &centers, labels[i], d)).sum();
        history.push(inertia);
        if prev_inertia - inertia <= config.tol {
            prev_inertia = inertia;
            break;
        }
        prev_inertia = inertia;
    }

    (labels, prev_inertia, history)
}

/// k-means++ seeding: first center uniform, later centers sampled with
/// probability proportional to squared distance from the chosen set.
fn plus_plus_init(rows: &DMatrix<f64>, r: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m = rows.nrows();
    let d = rows.ncols();
    let mut centers = DMatrix::<f64>::zeros(r, d);
    let first = rng.gen_range(0..m);
    centers.row_mut(0).copy_from(&rows.row(first));

    let mut dist2 = vec![0.0f64; m];
    for i in 0..m {
        dist2[i] = sq_dist(rows, i, &centers, 0, d);
    }
    for c in 1..r {
        let total: f64 = dist2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.gen::<f64>() * total;
            let mut chosen = m - 1;
            for (i, &w) in dist2.iter().enumerate() {
                u -= w;
                if u <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.gen_range(0..m)
        };
        centers.row_mut(c).copy_from(&rows.row(pick));
        for i in 0..m {
            let dist = sq_dist(rows, i, &centers, c, d);
            if dist < dist2[i] {
                dist2[i] = dist;
            }
        }
    }
    centers
}

/// Every empty cluster steals the farthest point of the largest cluster.
fn repair_empty_clusters(rows: &DMatrix<f64>, labels: &mut [usize], centers: &DMatrix<f64>, r: usize) {
    let d = rows.ncols();
    loop {
        let mut counts = vec![0usize; r];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let largest = counts
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(c, _)| c)
            .expect("nonempty label set");
        let victim = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == largest)
            .max_by(|(i, _), (j, _)| {
                sq_dist(rows, *i, centers, largest, d)
                    .partial_cmp(&sq_dist(rows, *j, centers, largest, d))
                    .unwrap()
                    .then(j.cmp(i))
            })
            .map(|(i, _)| i)
            .expect("largest cluster is nonempty");
        labels[victim] = empty;
    }
}

fn sq_dist(rows: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>, c: usize, d: usize) -> f64 {
    let mut acc = 0.0;
    for j in 0..d {
        let diff = rows[(i, j)] - centers[(c, j)];
        acc += diff * diff;
    }
    acc
}
