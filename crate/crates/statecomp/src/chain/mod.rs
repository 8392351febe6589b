//! Core Markov-chain data model: trajectories, matrix classes, stationary
//! distributions, mixing times, and simulation.
//!
//! Indexing is 0-based throughout. `n` always counts *transitions*; a
//! trajectory holding `n + 1` states yields exactly `n` transitions.

mod diagnostics;
mod matrix;
mod mixing;
mod simulate;
mod stationary;
mod trajectory;

pub use diagnostics::ChainDiagnostics;
pub use matrix::{
    empirical_distribution, empirical_frequency, empirical_transition, frequency_from_transition,
    validate_transition, FrequencyMatrix, StochasticMatrix, ValidationReport, RENORM_TOL,
    STRICT_TOL,
};
pub use mixing::{
    eigengap_mixing_bound, eigengap_rate_factor, mixing_time, mixing_time_with_caps,
    reversible_second_eigenvalue, MixingCaps,
};
pub use simulate::{simulate_trajectory, StartState};
pub use stationary::{stationary_distribution, StationaryDistribution};
pub use trajectory::Trajectory;
