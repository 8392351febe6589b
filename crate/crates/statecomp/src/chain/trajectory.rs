use crate::error::{Error, Result};

/// An observed sequence of states from a finite-state chain.
///
/// Holds the `n + 1` states of a walk with `n` transitions together with the
/// state-space size `p`. Every stored index lies in `[0, p)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    states: Vec<usize>,
    p: usize,
}

impl Trajectory {
    /// Wraps a state sequence, checking it is nonempty and within `[0, p)`.
    pub fn new(states: Vec<usize>, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidParameter("state-space size p must be >= 1".into()));
        }
        if states.is_empty() {
            return Err(Error::InsufficientData(
                "a trajectory must contain at least one state".into(),
            ));
        }
        if let Some(&bad) = states.iter().find(|&&s| s >= p) {
            return Err(Error::InvalidParameter(format!(
                "state index {bad} out of range for p = {p}"
            )));
        }
        Ok(Self { states, p })
    }

    /// State-space size.
    pub fn num_states(&self) -> usize {
        self.p
    }

    /// The observed states, length `transitions() + 1`.
    pub fn states(&self) -> &[usize] {
        &self.states
    }

    /// Number of transitions `n` (one less than the number of states).
    pub fn transitions(&self) -> usize {
        self.states.len() - 1
    }

    /// Iterator over consecutive `(from, to)` pairs.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.states.windows(2).map(|w| (w[0], w[1]))
    }

    /// Requires at least `n` transitions, returning an error otherwise.
    pub(crate) fn require_transitions(&self, n: usize) -> Result<()> {
        if self.transitions() < n {
            return Err(Error::InsufficientData(format!(
                "need at least {n} transitions, trajectory has {}",
                self.transitions()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_one_is_allowed_and_has_zero_transitions() {
        let t = Trajectory::new(vec![2], 3).unwrap();
        assert_eq!(t.transitions(), 0);
        assert_eq!(t.pairs().count(), 0);
    }

    #[test]
    fn out_of_range_state_is_rejected() {
        assert!(Trajectory::new(vec![0, 3], 3).is_err());
        assert!(Trajectory::new(vec![], 3).is_err());
        assert!(Trajectory::new(vec![0], 0).is_err());
    }

    #[test]
    fn pairs_walk_the_windows() {
        let t = Trajectory::new(vec![0, 1, 0, 1], 2).unwrap();
        let pairs: Vec<_> = t.pairs().collect();
        assert_eq!(pairs, vec![(0, 1), (1, 0), (0, 1)]);
        assert_eq!(t.transitions(), 3);
    }
}
