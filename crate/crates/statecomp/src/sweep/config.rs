use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ground-truth family a sweep draws from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum GeneratorSpec {
    LowRank,
    Imbalanced { delta: f64 },
    Aggregatable,
    Lumpable,
}

impl GeneratorSpec {
    pub fn label(&self) -> &'static str {
        match self {
            GeneratorSpec::LowRank => "low_rank",
            GeneratorSpec::Imbalanced { .. } => "imbalanced",
            GeneratorSpec::Aggregatable => "aggregatable",
            GeneratorSpec::Lumpable => "lumpable",
        }
    }

    pub(crate) fn id(&self) -> u64 {
        match self {
            GeneratorSpec::LowRank => 1,
            GeneratorSpec::Imbalanced { .. } => 2,
            GeneratorSpec::Aggregatable => 3,
            GeneratorSpec::Lumpable => 4,
        }
    }
}

/// How each trial picks the first state of its walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartMode {
    /// Always start at state 0.
    FixedState,
    /// Draw the start from the stationary distribution (the default).
    #[default]
    StationaryDraw,
}

impl StartMode {
    pub fn label(&self) -> &'static str {
        match self {
            StartMode::FixedState => "fixed_state",
            StartMode::StationaryDraw => "stationary_draw",
        }
    }
}

/// How the per-cell sample size is derived from `(k, p, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSizeFormula {
    /// `n = round(k * p * r * ln(p)^2)`, the default.
    #[default]
    LnPSquared,
    /// `n` solving `n = round(k * p * r * ln(n)^2)`, the self-referential
    /// variant used for the lumpable-partition experiments.
    LnNSquaredFixedPoint,
}

impl SampleSizeFormula {
    pub fn label(&self) -> &'static str {
        match self {
            SampleSizeFormula::LnPSquared => "n = round(k * p * r * ln(p)^2)",
            SampleSizeFormula::LnNSquaredFixedPoint => "n = round(k * p * r * ln(n)^2)",
        }
    }
}

/// Grid and trial settings for one sweep.
///
/// Sample sizes follow the configured formula with `k` ranging over
/// `k_values`; the formula is recorded in all output metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub generator: GeneratorSpec,
    pub p_values: Vec<usize>,
    pub r: usize,
    pub k_values: Vec<u32>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub start_mode: StartMode,
    /// Restarts for the k-means step of the partition estimators.
    #[serde(default = "default_restarts")]
    pub kmeans_restarts: usize,
    #[serde(default)]
    pub n_formula: SampleSizeFormula,
}

fn default_trials() -> usize {
    20
}

fn default_restarts() -> usize {
    20
}

impl SweepConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        if self.r < 1 {
            return Err(Error::InvalidParameter("rank r must be >= 1".into()));
        }
        if self.p_values.is_empty() || self.k_values.is_empty() {
            return Err(Error::InvalidParameter("p_values and k_values must be nonempty".into()));
        }
        if self.k_values.contains(&0) {
            return Err(Error::InvalidParameter("k values must be positive".into()));
        }
        if self.p_values.iter().any(|&p| p < 2 || p < self.r) {
            return Err(Error::InvalidParameter(
                "every p must be at least 2 and at least r".into(),
            ));
        }
        if self.kmeans_restarts < 1 {
            return Err(Error::InvalidParameter("kmeans_restarts must be >= 1".into()));
        }
        Ok(())
    }
}

/// `n = round(k * p * r * ln(p)^2)`.
pub fn sample_size(k: u32, p: usize, r: usize) -> usize {
    sample_size_for(k, p, r, SampleSizeFormula::LnPSquared)
}

/// Sample size under either formula; the fixed-point variant iterates
/// `n <- k p r ln(n)^2` to convergence.
pub fn sample_size_for(k: u32, p: usize, r: usize, formula: SampleSizeFormula) -> usize {
    let kpr = k as f64 * p as f64 * r as f64;
    match formula {
        SampleSizeFormula::LnPSquared => {
            let logp = (p as f64).ln();
            (kpr * logp * logp).round() as usize
        }
        SampleSizeFormula::LnNSquaredFixedPoint => {
            let mut n = kpr.max(16.0);
            for _ in 0..200 {
                let next = kpr * n.ln().powi(2);
                if (next - n).abs() < 0.5 {
                    n = next;
                    break;
                }
                n = next;
            }
            n.round() as usize
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_size_matches_the_formula() {
        let logp = 200f64.ln();
        let expected = (4.0 * 200.0 * 3.0 * logp * logp).round() as usize;
        assert_eq!(sample_size(4, 200, 3), expected);
    }

    #[test]
    fn config_round_trips_through_json() {
        let config = SweepConfig {
            generator: GeneratorSpec::Imbalanced { delta: 4.0 },
            p_values: vec![50, 200],
            r: 3,
            k_values: vec![2, 4],
            trials: 5,
            base_seed: 9,
            start_mode: StartMode::FixedState,
            kmeans_restarts: 10,
            n_formula: SampleSizeFormula::LnPSquared,
        };
        let json = serde_json::to_string(&config).unwrap();
        let back: SweepConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn defaults_fill_in() {
        let json = r#"{"generator":{"name":"low_rank"},"p_values":[20],"r":2,"k_values":[2]}"#;
        let config: SweepConfig = serde_json::from_str(json).unwrap();
        assert_eq!(config.trials, 20);
        assert_eq!(config.start_mode, StartMode::StationaryDraw);
        assert!(config.validate().is_ok());
    }
}
