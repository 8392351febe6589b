//! Serialization: dense matrix CSV (a `p,q` dimension header then row-major
//! data), JSON envelopes for matrices and bases, newline-delimited
//! trajectories, `state,block` partition CSV, and ground-truth chain bundles.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::chain::{FrequencyMatrix, StochasticMatrix, Trajectory};
use crate::error::{Error, Result};
use crate::spectral::PartitionLabels;
use crate::synth::GroundTruthChain;

/// Dense CSV: first line holds the dimensions `p,q`, then `p` lines of `q`
/// comma-separated entries.
pub fn write_matrix_csv(m: &DMatrix<f64>) -> String {
    let mut out = format!("{},{}\n", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Parses the dense CSV format produced by [`write_matrix_csv`].
pub fn read_matrix_csv(text: &str) -> Result<DMatrix<f64>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Schema("matrix CSV is empty".into()))?;
    let dims: Vec<usize> = header
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Schema(format!("bad dimension header '{header}'")))?;
    if dims.len() != 2 || dims[0] == 0 || dims[1] == 0 {
        return Err(Error::Schema(format!("bad dimension header '{header}'")));
    }
    let (p, q) = (dims[0], dims[1]);
    let mut entries = Vec::with_capacity(p * q);
    for (i, line) in lines.enumerate() {
        if i >= p {
            return Err(Error::Schema(format!("more than {p} data rows")));
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Schema(format!("unparseable entry in row {i}")))?;
        if row.len() != q {
            return Err(Error::Schema(format!(
                "row {i} has {} entries, expected {q}",
                row.len()
            )));
        }
        entries.extend(row);
    }
    if entries.len() != p * q {
        return Err(Error::Schema(format!(
            "expected {p} data rows, found {}",
            entries.len() / q
        )));
    }
    Ok(DMatrix::from_row_iterator(p, q, entries))
}

/// JSON envelope shared by matrices and bases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixEnvelope {
    pub p: usize,
    pub q: usize,
    pub entries: Vec<Vec<f64>>,
    pub kind: String,
}

impl MatrixEnvelope {
    pub fn from_matrix(m: &DMatrix<f64>, kind: &str) -> Self {
        Self {
            p: m.nrows(),
            q: m.ncols(),
            entries: (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
                .collect(),
            kind: kind.to_string(),
        }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
        if self.entries.len() != self.p || self.entries.iter().any(|r| r.len() != self.q) {
            return Err(Error::Schema(format!(
                "envelope claims {}x{} but entries disagree",
                self.p, self.q
            )));
        }
        Ok(DMatrix::from_row_iterator(
            self.p,
            self.q,
            self.entries.iter().flatten().copied(),
        ))
    }
}

/// Reads a transition matrix from either format: a JSON envelope when the
/// content starts with `{`, the dense CSV otherwise.
pub fn read_transition_auto(text: &str) -> Result<StochasticMatrix> {
    let raw = if text.trim_start().starts_with('{') {
        let env: MatrixEnvelope = serde_json::from_str(text)?;
        env.to_matrix()?
    } else {
        read_matrix_csv(text)?
    };
    StochasticMatrix::new(raw)
}

/// One state index per line, with a trailing newline.
pub fn write_trajectory(traj: &Trajectory) -> String {
    let mut out = String::new();
    for &s in traj.states() {
        out.push_str(&format!("{s}\n"));
    }
    out
}

/// Parses a newline-delimited trajectory. When `p` is absent the state-space
/// size is inferred as one past the largest index.
pub fn read_trajectory(text: &str, p: Option<usize>) -> Result<Trajectory> {
    let states: Vec<usize> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.parse::<usize>()
                .map_err(|_| Error::Schema(format!("bad state index '{l}'")))
        })
        .collect::<Result<_>>()?;
    if states.is_empty() {
        return Err(Error::InsufficientData("trajectory file holds no states".into()));
    }
    let p = match p {
        Some(p) => p,
        None => states.iter().copied().max().unwrap_or(0) + 1,
    };
    Trajectory::new(states, p)
}

/// `state,block` CSV for a partition.
pub fn write_partition_csv(labels: &PartitionLabels) -> String {
    let mut out = String::from("state,block\n");
    for (state, &block) in labels.labels().iter().enumerate() {
        out.push_str(&format!("{state},{block}\n"));
    }
    out
}

/// Parses the `state,block` CSV produced by [`write_partition_csv`]. States
/// must form the contiguous range `0..p` (any order).
pub fn read_partition_csv(text: &str) -> Result<PartitionLabels> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (idx == 0 && line == "state,block") {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::Schema(format!("bad partition row '{line}'")));
        }
        let state: usize = parts[0]
            .trim()
            .parse()
            .map_err(|_| Error::Schema(format!("bad state in '{line}'")))?;
        let block: usize = parts[1]
            .trim()
            .parse()
            .map_err(|_| Error::Schema(format!("bad block in '{line}'")))?;
        rows.push((state, block));
    }
    if rows.is_empty() {
        return Err(Error::Schema("partition CSV holds no rows".into()));
    }
    let p = rows.len();
    let mut labels = vec![usize::MAX; p];
    for (state, block) in rows {
        if state >= p || labels[state] != usize::MAX {
            return Err(Error::Schema(format!(
                "states must cover 0..{p} exactly once (saw {state} twice or out of range)"
            )));
        }
        labels[state] = block;
    }
    let blocks = labels.iter().copied().max().unwrap_or(0) + 1;
    PartitionLabels::new(labels, blocks)
}

/// Serializable bundle of a generated chain, for harness replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainBundle {
    pub p: usize,
    pub rank: usize,
    pub transition: MatrixEnvelope,
    pub pi: Vec<f64>,
    pub partition: Option<Vec<usize>>,
    pub blocks: Option<usize>,
    pub metadata: serde_json::Value,
}

impl ChainBundle {
    pub fn from_chain(chain: &GroundTruthChain, metadata: serde_json::Value) -> Self {
        Self {
            p: chain.num_states(),
            rank: chain.rank(),
            transition: MatrixEnvelope::from_matrix(chain.transition().as_matrix(), "transition"),
            pi: chain.stationary().probs().to_vec(),
            partition: chain.partition().map(|l| l.labels().to_vec()),
            blocks: chain.partition().map(|l| l.blocks()),
            metadata,
        }
    }

    pub fn transition_matrix(&self) -> Result<StochasticMatrix> {
        StochasticMatrix::new(self.transition.to_matrix()?)
    }

    pub fn partition_labels(&self) -> Result<Option<PartitionLabels>> {
        match (&self.partition, self.blocks) {
            (Some(labels), Some(blocks)) => {
                Ok(Some(PartitionLabels::new(labels.clone(), blocks)?))
            }
            _ => Ok(None),
        }
    }
}

/// Envelope for a frequency matrix.
pub fn frequency_envelope(f: &FrequencyMatrix) -> MatrixEnvelope {
    MatrixEnvelope::from_matrix(f.as_matrix(), "frequency")
}

/// Envelope for a transition matrix.
pub fn transition_envelope(p: &StochasticMatrix) -> MatrixEnvelope {
    MatrixEnvelope::from_matrix(p.as_matrix(), "transition")
}
