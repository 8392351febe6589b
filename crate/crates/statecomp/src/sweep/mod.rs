//! Seeded Monte-Carlo harness that compares the spectral estimators against
//! the empirical ones across sample-size grids and fits error-decay rates.
//! Trials run in parallel with per-trial derived seeds, so results are
//! identical under any scheduling.

mod config;
mod runner;
mod summary;

pub use config::{sample_size, sample_size_for, GeneratorSpec, SampleSizeFormula, StartMode, SweepConfig};
pub use runner::{
    run_sweep, EstimatorKind, FailureRecord, SubspaceReport, SweepRecord, SweepResult,
};
pub use summary::{fit_rate, summarize, write_figure_summaries, LossField, RateFit, SummaryCell};
