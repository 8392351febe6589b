use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chain::{StochasticMatrix, Trajectory};
use crate::error::{Error, Result};

/// How a simulated walk picks its first state.
#[derive(Debug, Clone, PartialEq)]
pub enum StartState {
    /// Start at a fixed state index.
    Fixed(usize),
    /// Draw the first state from an explicit distribution (e.g. the
    /// stationary one).
    Draw(Vec<f64>),
}

impl From<usize> for StartState {
    fn from(i: usize) -> Self {
        StartState::Fixed(i)
    }
}

/// Simulates `n` transitions of the chain, returning the `n + 1` visited
/// states. Fully deterministic given the seed.
pub fn simulate_trajectory(
    p: &StochasticMatrix,
    start: StartState,
    n: usize,
    seed: u64,
) -> Result<Trajectory> {
    if p.nrows() != p.ncols() {
        return Err(Error::Dimension("simulation requires a square transition matrix".into()));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("transition count n must be >= 1".into()));
    }
    let dim = p.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let first = match &start {
        StartState::Fixed(i) => {
            if *i >= dim {
                return Err(Error::InvalidParameter(format!(
                    "initial state {i} out of range for p = {dim}"
                )));
            }
            *i
        }
        StartState::Draw(weights) => {
            if weights.len() != dim {
                return Err(Error::Dimension(format!(
                    "initial distribution has length {}, expected {dim}",
                    weights.len()
                )));
            }
            if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                return Err(Error::InvalidParameter(
                    "initial distribution must be nonnegative and finite".into(),
                ));
            }
            let total: f64 = weights.iter().sum();
            if total <= 0.0 {
                return Err(Error::InvalidParameter("initial distribution has zero mass".into()));
            }
            sample_index(weights, total, &mut rng)
        }
    };

    // Per-row cumulative sums let each step be a single binary search.
    let cumulative: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            let mut acc = 0.0;
            p.as_matrix()
                .row(i)
                .iter()
                .map(|v| {
                    acc += v;
                    acc
                })
                .collect()
        })
        .collect();

    let mut states = Vec::with_capacity(n + 1);
    states.push(first);
    let mut current = first;
    for _ in 0..n {
        let u: f64 = rng.gen::<f64>() * cumulative[current][dim - 1];
        current = match cumulative[current].binary_search_by(|c| c.partial_cmp(&u).unwrap()) {
            Ok(idx) | Err(idx) => idx.min(dim - 1),
        };
        states.push(current);
    }
    Trajectory::new(states, dim)
}

fn sample_index(weights: &[f64], total: f64, rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}
