use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sweep::{EstimatorKind, GeneratorSpec, SweepRecord, SweepResult};

/// A loss column of the sweep records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossField {
    L1Total,
    AvgRowTv,
    MaxRowTv,
    SinThetaSpectral,
    SinThetaFrobenius,
    Misclassification,
}

impl LossField {
    pub fn label(&self) -> &'static str {
        match self {
            LossField::L1Total => "l1_total",
            LossField::AvgRowTv => "avg_row_tv",
            LossField::MaxRowTv => "max_row_tv",
            LossField::SinThetaSpectral => "sin_theta_spectral",
            LossField::SinThetaFrobenius => "sin_theta_frobenius",
            LossField::Misclassification => "misclassification",
        }
    }

    fn extract(&self, rec: &SweepRecord) -> Option<f64> {
        match self {
            LossField::L1Total => Some(rec.losses.l1_total),
            LossField::AvgRowTv => Some(rec.losses.avg_row_tv),
            LossField::MaxRowTv => Some(rec.losses.max_row_tv),
            LossField::SinThetaSpectral => Some(rec.losses.sin_theta_spectral),
            LossField::SinThetaFrobenius => Some(rec.losses.sin_theta_frobenius),
            LossField::Misclassification => rec.misclassification,
        }
    }
}

/// Aggregated mean loss of one `(p, k, estimator, metric)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryCell {
    pub p: usize,
    pub r: usize,
    pub k: u32,
    pub n: usize,
    pub estimator: EstimatorKind,
    pub metric: String,
    pub mean: f64,
    pub std_err: f64,
    pub trials: usize,
}

/// Means and standard errors per cell, over every metric present. Cell order
/// is deterministic and independent of trial execution order.
pub fn summarize(result: &SweepResult) -> Vec<SummaryCell> {
    // (p, k, estimator label, metric) -> values
    let mut groups: BTreeMap<(usize, u32, &'static str, String), Vec<f64>> = BTreeMap::new();
    let mut meta: BTreeMap<(usize, u32), (usize, usize)> = BTreeMap::new();
    for rec in &result.records {
        meta.entry((rec.p, rec.k)).or_insert((rec.r, rec.n));
        let mut add = |metric: String, value: f64| {
            groups
                .entry((rec.p, rec.k, rec.estimator.label(), metric))
                .or_default()
                .push(value);
        };
        for field in [
            LossField::L1Total,
            LossField::AvgRowTv,
            LossField::MaxRowTv,
            LossField::SinThetaSpectral,
            LossField::SinThetaFrobenius,
            LossField::Misclassification,
        ] {
            if let Some(v) = field.extract(rec) {
                add(field.label().to_string(), v);
            }
        }
        if let Some(s) = rec.subspaces {
            add("sin_theta_u_f_spectral".into(), s.u_f_spectral);
            add("sin_theta_u_f_frobenius".into(), s.u_f_frobenius);
            add("sin_theta_v_f_spectral".into(), s.v_f_spectral);
            add("sin_theta_v_f_frobenius".into(), s.v_f_frobenius);
            add("sin_theta_u_p_spectral".into(), s.u_p_spectral);
            add("sin_theta_u_p_frobenius".into(), s.u_p_frobenius);
            add("sin_theta_v_p_spectral".into(), s.v_p_spectral);
            add("sin_theta_v_p_frobenius".into(), s.v_p_frobenius);
        }
    }

    groups
        .into_iter()
        .map(|((p, k, estimator, metric), values)| {
            let count = values.len();
            let mean = values.iter().sum::<f64>() / count as f64;
            let var = if count > 1 {
                values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1) as f64
            } else {
                0.0
            };
            let (r, n) = meta[&(p, k)];
            SummaryCell {
                p,
                r,
                k,
                n,
                estimator: if estimator == "empirical" {
                    EstimatorKind::Empirical
                } else {
                    EstimatorKind::Spectral
                },
                metric,
                mean,
                std_err: (var / count as f64).sqrt(),
                trials: count,
            }
        })
        .collect()
}

/// Slope of `log(mean loss)` against `log(n)`, with the fit residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean squared residual of the least-squares line.
    pub rms_residual: f64,
    /// `(ln n, ln mean loss)` points that entered the fit.
    pub points: Vec<(f64, f64)>,
}

/// Least-squares fit of log mean loss against log n for one estimator and
/// metric. Requires at least four distinct sample sizes.
pub fn fit_rate(
    result: &SweepResult,
    estimator: EstimatorKind,
    field: LossField,
) -> Result<RateFit> {
    let mut by_n: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for rec in result.records.iter().filter(|r| r.estimator == estimator) {
        if let Some(v) = field.extract(rec) {
            by_n.entry(rec.n).or_default().push(v);
        }
    }
    if by_n.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "rate fit needs >= 4 distinct n values, found {}",
            by_n.len()
        )));
    }
    let points: Vec<(f64, f64)> = by_n
        .into_iter()
        .map(|(n, values)| {
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            ((n as f64).ln(), mean.max(f64::MIN_POSITIVE).ln())
        })
        .collect();

    let count = points.len() as f64;
    let sx: f64 = points.iter().map(|(x, _)| x).sum();
    let sy: f64 = points.iter().map(|(_, y)| y).sum();
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
    let denom = count * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return Err(Error::InsufficientData("all sample sizes coincide".into()));
    }
    let slope = (count * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / count;
    let rms_residual = (points
        .iter()
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum::<f64>()
        / count)
        .sqrt();
    Ok(RateFit { slope, intercept, rms_residual, points })
}

#[derive(Serialize)]
struct FigureFile<'a> {
    figure: &'a str,
    generator: &'a str,
    generator_params: serde_json::Value,
    n_formula: &'a str,
    start_mode: &'a str,
    degraded_cells: &'a [(usize, u32)],
    cells: Vec<&'a SummaryCell>,
}

/// Writes the per-figure JSON summaries into `dir` and returns the paths.
///
/// Always writes `fig2a` (frequency l1), `fig2b` (transition row TV) and
/// `fig3` (the full p-by-k grid); adds `fig4` for imbalanced sweeps and
/// `fig5` (misclassification) when partition losses are present. A `rates`
/// file with fitted slopes is written when at least four sample sizes exist.
pub fn write_figure_summaries(result: &SweepResult, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let cells = summarize(result);
    let generator_params = serde_json::to_value(result.config.generator)?;
    let mut written = Vec::new();

    let write = |name: &str, metrics: &[&str]| -> Result<Option<PathBuf>> {
        let selected: Vec<&SummaryCell> =
            cells.iter().filter(|c| metrics.contains(&c.metric.as_str())).collect();
        if selected.is_empty() {
            return Ok(None);
        }
        let file = FigureFile {
            figure: name,
            generator: result.config.generator.label(),
            generator_params: generator_params.clone(),
            n_formula: result.config.n_formula.label(),
            start_mode: result.config.start_mode.label(),
            degraded_cells: &result.degraded_cells,
            cells: selected,
        };
        let path = dir.join(format!("{name}.json"));
        std::fs::write(&path, serde_json::to_string_pretty(&file)?)?;
        Ok(Some(path))
    };

    if let Some(p) = write("fig2a", &["l1_total"])? {
        written.push(p);
    }
    if let Some(p) = write("fig2b", &["avg_row_tv", "max_row_tv"])? {
        written.push(p);
    }
    if let Some(p) = write(
        "fig2cd",
        &[
            "sin_theta_u_f_spectral",
            "sin_theta_u_f_frobenius",
            "sin_theta_v_f_spectral",
            "sin_theta_v_f_frobenius",
            "sin_theta_u_p_spectral",
            "sin_theta_u_p_frobenius",
            "sin_theta_v_p_spectral",
            "sin_theta_v_p_frobenius",
        ],
    )? {
        written.push(p);
    }
    if let Some(p) = write("fig3", &["l1_total", "avg_row_tv", "max_row_tv"])? {
        written.push(p);
    }
    if matches!(result.config.generator, GeneratorSpec::Imbalanced { .. }) {
        if let Some(p) = write("fig4", &["l1_total", "avg_row_tv", "max_row_tv"])? {
            written.push(p);
        }
    }
    if let Some(p) = write("fig5", &["misclassification"])? {
        written.push(p);
    }

    // Rate fits, when the grid is deep enough.
    let mut rates = serde_json::Map::new();
    for estimator in [EstimatorKind::Empirical, EstimatorKind::Spectral] {
        for field in [LossField::L1Total, LossField::AvgRowTv] {
            if let Ok(fit) = fit_rate(result, estimator, field) {
                rates.insert(
                    format!("{}_{}", estimator.label(), field.label()),
                    serde_json::to_value(&fit)?,
                );
            }
        }
    }
    if !rates.is_empty() {
        let path = dir.join("rates.json");
        std::fs::write(&path, serde_json::to_string_pretty(&serde_json::Value::Object(rates))?)?;
        written.push(path);
    }
    Ok(written)
}
