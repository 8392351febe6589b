use nalgebra::DMatrix;

use crate::chain::{StationaryDistribution, Trajectory};
use crate::error::{Error, Result};

/// Row sums (or the grand total for frequency matrices) must match 1 to this
/// tolerance on construction.
pub const STRICT_TOL: f64 = 1e-12;
/// Inputs off by at most this much are renormalized with a warning flag,
/// to admit float-serialized matrices.
pub const RENORM_TOL: f64 = 1e-8;

/// A row-stochastic `p x q` matrix: entries in `[0, 1]`, each row summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    entries: DMatrix<f64>,
    renormalized: bool,
}

impl StochasticMatrix {
    /// Validates and wraps a matrix. Rows whose sums deviate from 1 by more
    /// than [`STRICT_TOL`] but at most [`RENORM_TOL`] are renormalized and the
    /// result is flagged via [`StochasticMatrix::was_renormalized`].
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::Dimension("matrix must be nonempty".into()));
        }
        let mut entries = entries;
        let mut renormalized = false;
        for i in 0..entries.nrows() {
            let row = entries.row(i);
            if let Some(bad) = row.iter().find(|x| !x.is_finite() || **x < 0.0 || **x > 1.0 + RENORM_TOL) {
                return Err(Error::NotStochastic(format!(
                    "entry {bad} in row {i} outside [0, 1]"
                )));
            }
            let sum: f64 = row.sum();
            let dev = (sum - 1.0).abs();
            if dev > RENORM_TOL {
                return Err(Error::NotStochastic(format!("row {i} sums to {sum}")));
            }
            if dev > STRICT_TOL {
                let scale = 1.0 / sum;
                entries.row_mut(i).scale_mut(scale);
                renormalized = true;
            }
        }
        Ok(Self { entries, renormalized })
    }

    /// Builds from row-major nested data.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        nested_to_matrix(rows).and_then(Self::new)
    }

    /// True when any input row was renormalized during construction.
    pub fn was_renormalized(&self) -> bool {
        self.renormalized
    }

    /// Number of rows `p` (source states).
    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    /// Number of columns `q` (destination states).
    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    /// Borrow the raw matrix.
    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Row `i` as a probability vector.
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.entries.row(i).iter().copied().collect()
    }
}

/// A nonnegative `p x p` matrix whose entries sum to 1: the long-run joint
/// distribution of consecutive states.
///
/// Truth instances additionally satisfy the balance equations
/// (row sums equal column sums); empirical instances need not.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyMatrix {
    entries: DMatrix<f64>,
    renormalized: bool,
}

impl FrequencyMatrix {
    /// Validates and wraps a matrix (square, nonnegative, total mass 1; totals
    /// within [`RENORM_TOL`] are renormalized with a flag).
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.nrows() != entries.ncols() {
            return Err(Error::Dimension(format!(
                "frequency matrix must be square and nonempty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if let Some(bad) = entries.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::NotStochastic(format!(
                "frequency entry {bad} is negative or non-finite"
            )));
        }
        let total: f64 = entries.sum();
        let dev = (total - 1.0).abs();
        if dev > RENORM_TOL {
            return Err(Error::NotStochastic(format!("total mass is {total}, not 1")));
        }
        let mut entries = entries;
        let mut renormalized = false;
        if dev > STRICT_TOL {
            entries.scale_mut(1.0 / total);
            renormalized = true;
        }
        Ok(Self { entries, renormalized })
    }

    /// Builds from row-major nested data.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        nested_to_matrix(rows).and_then(Self::new)
    }

    /// True when the input total was renormalized during construction.
    pub fn was_renormalized(&self) -> bool {
        self.renormalized
    }

    /// State-space size `p`.
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Borrow the raw matrix.
    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Maximum violation of the balance equations `F 1 = F' 1`.
    ///
    /// Zero (to tolerance) for the frequency matrix of an ergodic chain.
    pub fn balance_violation(&self) -> f64 {
        let p = self.dim();
        (0..p)
            .map(|i| (self.entries.row(i).sum() - self.entries.column(i).sum()).abs())
            .fold(0.0, f64::max)
    }

    /// Row sums, i.e. the stationary distribution when this is a truth matrix.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entries.row(i).sum()).collect()
    }
}

/// Outcome of [`validate_transition`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// Rows are probability vectors (within [`RENORM_TOL`]).
    pub is_stochastic: bool,
    /// The positivity digraph is strongly connected, so no proper nonempty
    /// subset of states is closed.
    pub is_ergodic_class: bool,
    /// Largest deviation of a row sum from 1.
    pub max_row_sum_error: f64,
    /// First row violating stochasticity, if any.
    pub first_bad_row: Option<usize>,
}

/// Checks whether a square matrix is a transition matrix and whether it is in
/// the ergodic class.
///
/// The subset condition ("no proper nonempty set of states is closed") is
/// checked as strong connectivity of the digraph on positive entries, which is
/// equivalent: a violating subset would contain a terminal strongly connected
/// component and vice versa.
pub fn validate_transition(m: &DMatrix<f64>) -> Result<ValidationReport> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::Dimension(format!(
            "expected a square nonempty matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let p = m.nrows();
    let mut is_stochastic = true;
    let mut max_err: f64 = 0.0;
    let mut first_bad_row = None;
    for i in 0..p {
        let row = m.row(i);
        let entries_ok = row.iter().all(|x| x.is_finite() && *x >= 0.0 && *x <= 1.0 + RENORM_TOL);
        let err = (row.sum() - 1.0).abs();
        max_err = max_err.max(err);
        if !entries_ok || err > RENORM_TOL {
            is_stochastic = false;
            if first_bad_row.is_none() {
                first_bad_row = Some(i);
            }
        }
    }
    let is_ergodic_class = is_stochastic && strongly_connected(m);
    Ok(ValidationReport { is_stochastic, is_ergodic_class, max_row_sum_error: max_err, first_bad_row })
}

/// Strong connectivity of the digraph with an edge `i -> j` iff `m[(i, j)] > 0`.
fn strongly_connected(m: &DMatrix<f64>) -> bool {
    let p = m.nrows();
    let reaches_all = |forward: bool| -> bool {
        let mut seen = vec![false; p];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for j in 0..p {
                let w = if forward { m[(i, j)] } else { m[(j, i)] };
                if w > 0.0 && !seen[j] {
                    seen[j] = true;
                    count += 1;
                    stack.push(j);
                }
            }
        }
        count == p
    };
    reaches_all(true) && reaches_all(false)
}

/// Empirical frequency matrix: entry `(i, j)` is the count of consecutive
/// `(i, j)` pairs divided by the transition count `n`.
pub fn empirical_frequency(traj: &Trajectory) -> Result<FrequencyMatrix> {
    traj.require_transitions(1)?;
    let p = traj.num_states();
    let n = traj.transitions() as f64;
    let mut counts = DMatrix::<f64>::zeros(p, p);
    for (a, b) in traj.pairs() {
        counts[(a, b)] += 1.0;
    }
    counts.scale_mut(1.0 / n);
    FrequencyMatrix::new(counts)
}

/// Empirical transition matrix: row `i` is the conditional distribution of the
/// successor given source `i`; states never observed as a source get the
/// uniform row `1/p`.
pub fn empirical_transition(traj: &Trajectory) -> Result<StochasticMatrix> {
    traj.require_transitions(1)?;
    let p = traj.num_states();
    let mut counts = DMatrix::<f64>::zeros(p, p);
    let mut source_counts = vec![0.0f64; p];
    for (a, b) in traj.pairs() {
        counts[(a, b)] += 1.0;
        source_counts[a] += 1.0;
    }
    for i in 0..p {
        if source_counts[i] > 0.0 {
            let scale = 1.0 / source_counts[i];
            counts.row_mut(i).scale_mut(scale);
        } else {
            counts.row_mut(i).fill(1.0 / p as f64);
        }
    }
    StochasticMatrix::new(counts)
}

/// Empirical state distribution over positions `1..=n` of the trajectory
/// (the first state is excluded, matching the one-step visit counts).
pub fn empirical_distribution(traj: &Trajectory) -> Result<Vec<f64>> {
    traj.require_transitions(1)?;
    let p = traj.num_states();
    let n = traj.transitions() as f64;
    let mut counts = vec![0.0f64; p];
    for &s in &traj.states()[1..] {
        counts[s] += 1.0;
    }
    for c in counts.iter_mut() {
        *c /= n;
    }
    Ok(counts)
}

/// Frequency matrix of a chain: `F[i][j] = pi[i] * P[i][j]`.
pub fn frequency_from_transition(
    p: &StochasticMatrix,
    pi: &StationaryDistribution,
) -> Result<FrequencyMatrix> {
    if p.nrows() != p.ncols() || p.nrows() != pi.len() {
        return Err(Error::Dimension(format!(
            "transition matrix is {}x{} but distribution has length {}",
            p.nrows(),
            p.ncols(),
            pi.len()
        )));
    }
    let mut f = p.as_matrix().clone();
    for i in 0..f.nrows() {
        let w = pi.probs()[i];
        f.row_mut(i).scale_mut(w);
    }
    FrequencyMatrix::new(f)
}

fn nested_to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::Dimension("matrix data must be nonempty".into()));
    }
    let q = rows[0].len();
    if rows.iter().any(|r| r.len() != q) {
        return Err(Error::Dimension("ragged rows in matrix data".into()));
    }
    Ok(DMatrix::from_row_iterator(rows.len(), q, rows.iter().flatten().copied()))
}
