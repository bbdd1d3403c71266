//! Dataset ingestion, min-max scaling to the unit cube and train/test partitioning.

use std::path::Path;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Hard cap on the training-set size used by the benchmark protocol.
pub const MAX_TRAIN: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Regression,
    Classification,
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Task::Regression => write!(f, "regression"),
            Task::Classification => write!(f, "classification"),
        }
    }
}

impl std::str::FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "regression" => Ok(Task::Regression),
            "classification" => Ok(Task::Classification),
            other => Err(format!(
                "unknown task `{other}` (expected regression|classification)"
            )),
        }
    }
}

/// Unscaled records as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    /// Row-major, `n * p`.
    pub features: Vec<f64>,
    pub targets: Vec<f64>,
    pub feature_names: Vec<String>,
    pub target_name: String,
    pub task: Task,
}

impl RawDataset {
    pub fn n_samples(&self) -> usize {
        self.targets.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_features();
        &self.features[i * p..(i + 1) * p]
    }

    /// Keeps only the listed rows, in the given order.
    pub fn select(&self, rows: &[usize]) -> RawDataset {
        let mut features = Vec::with_capacity(rows.len() * self.n_features());
        for &i in rows {
            features.extend_from_slice(self.row(i));
        }
        RawDataset {
            features,
            targets: rows.iter().map(|&i| self.targets[i]).collect(),
            feature_names: self.feature_names.clone(),
            target_name: self.target_name.clone(),
            task: self.task,
        }
    }
}

/// Reads a comma-separated file with a header row. Records with an empty or
/// non-numeric cell are dropped whole.
pub fn load_csv(path: impl AsRef<Path>, target_name: &str, task: Task) -> Result<RawDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, target_name, task)
}

pub fn read_csv(reader: impl std::io::Read, target_name: &str, task: Task) -> Result<RawDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let target_col = header
        .iter()
        .position(|h| h == target_name)
        .ok_or_else(|| Error::MissingColumn(target_name.to_string()))?;
    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != target_col)
        .map(|(_, h)| h.clone())
        .collect();

    let mut features = Vec::new();
    let mut targets = Vec::new();
    let mut row_buf = Vec::with_capacity(header.len());
    for (row_idx, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() != header.len() {
            continue;
        }
        row_buf.clear();
        let mut complete = true;
        for cell in record.iter() {
            match parse_cell(cell) {
                Some(v) => row_buf.push(v),
                None => {
                    complete = false;
                    break;
                }
            }
        }
        if !complete {
            continue;
        }
        let y = row_buf[target_col];
        if task == Task::Classification && y != 0.0 && y != 1.0 {
            return Err(Error::BadLabel {
                row: row_idx + 1,
                value: record[target_col].trim().to_string(),
            });
        }
        targets.push(y);
        features.extend(
            row_buf
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != target_col)
                .map(|(_, &v)| v),
        );
    }
    if targets.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if feature_names.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: 0,
        });
    }
    Ok(RawDataset {
        features,
        targets,
        feature_names,
        target_name: target_name.to_string(),
        task,
    })
}

/// Reads the named feature columns, in the given order, from every row. Extra
/// columns are ignored. Unlike [`read_csv`] no row may be dropped, so a missing
/// or non-numeric cell is an error.
pub fn read_feature_rows(reader: impl std::io::Read, names: &[String]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let cols = names
        .iter()
        .map(|name| {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::SchemaMismatch(format!("feature column `{name}` is missing")))
        })
        .collect::<Result<Vec<usize>>>()?;
    let mut rows = Vec::new();
    for (row_idx, record) in rdr.records().enumerate() {
        let record = record?;
        let row = cols
            .iter()
            .map(|&c| {
                record.get(c).and_then(parse_cell).ok_or_else(|| {
                    Error::SchemaMismatch(format!(
                        "data row {}: column `{}` is missing or not numeric",
                        row_idx + 1,
                        header[c]
                    ))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn parse_cell(cell: &str) -> Option<f64> {
    let cell = cell.trim();
    if cell.is_empty() {
        return None;
    }
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Whether the scaler sees only the training rows or the whole file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingMode {
    #[default]
    TrainOnly,
    WholeData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingTransform {
    pub mins: Vec<f64>,
    pub ranges: Vec<f64>,
}

pub fn fit_minmax(raw: &RawDataset) -> ScalingTransform {
    let p = raw.n_features();
    let mut mins = vec![f64::INFINITY; p];
    let mut maxs = vec![f64::NEG_INFINITY; p];
    for i in 0..raw.n_samples() {
        for (j, &v) in raw.row(i).iter().enumerate() {
            mins[j] = mins[j].min(v);
            maxs[j] = maxs[j].max(v);
        }
    }
    let ranges = mins.iter().zip(&maxs).map(|(lo, hi)| hi - lo).collect();
    ScalingTransform { mins, ranges }
}

impl ScalingTransform {
    pub fn dim(&self) -> usize {
        self.mins.len()
    }

    pub fn scale_value(&self, j: usize, v: f64) -> f64 {
        if self.ranges[j] > 0.0 {
            ((v - self.mins[j]) / self.ranges[j]).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }

    pub fn scale_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: row.len(),
            });
        }
        Ok(row
            .iter()
            .enumerate()
            .map(|(j, &v)| self.scale_value(j, v))
            .collect())
    }
}

/// Maps every feature into `[0, 1]`; values outside the fitted range are clamped.
pub fn apply_scaler(t: &ScalingTransform, raw: &RawDataset) -> Result<Dataset> {
    if raw.n_features() != t.dim() {
        return Err(Error::DimensionMismatch {
            expected: t.dim(),
            found: raw.n_features(),
        });
    }
    let p = t.dim();
    let features = raw
        .features
        .iter()
        .enumerate()
        .map(|(k, &v)| t.scale_value(k % p, v))
        .collect();
    Dataset::new(features, raw.targets.clone(), p, raw.task)
}

/// Scaled sample: features in the unit cube plus targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    targets: Vec<f64>,
    p: usize,
    task: Task,
}

impl Dataset {
    /// `features` is row-major with `p` columns.
    pub fn new(features: Vec<f64>, targets: Vec<f64>, p: usize, task: Task) -> Result<Self> {
        if p == 0 || features.len() != targets.len() * p {
            return Err(Error::DimensionMismatch {
                expected: targets.len() * p.max(1),
                found: features.len(),
            });
        }
        if targets.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if task == Task::Classification {
            if let Some(row) = targets.iter().position(|&y| y != 0.0 && y != 1.0) {
                return Err(Error::BadLabel {
                    row,
                    value: targets[row].to_string(),
                });
            }
        }
        Ok(Dataset {
            features,
            targets,
            p,
            task,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.targets.len()
    }

    pub fn n_features(&self) -> usize {
        self.p
    }

    pub fn task(&self) -> Task {
        self.task
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.p..(i + 1) * self.p]
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.features[i * self.p + j]
    }

    #[inline]
    pub fn target(&self, i: usize) -> f64 {
        self.targets[i]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn all_indices(&self) -> Vec<usize> {
        (0..self.n_samples()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

pub fn train_size(n_total: usize) -> usize {
    (2 * n_total / 3).min(MAX_TRAIN)
}

/// Uniformly random train/test split with `min(floor(2N/3), 2000)` training rows.
pub fn partition(n_total: usize, seed: u64) -> Result<Partition> {
    partition_with(n_total, &mut rng::stream(seed, 0))
}

pub fn partition_with(n_total: usize, rng: &mut rng::Stream) -> Result<Partition> {
    if n_total < 2 {
        return Err(Error::TooFewRows(n_total));
    }
    let n_train = train_size(n_total);
    let mut in_train = vec![false; n_total];
    for i in index::sample(rng, n_total, n_train) {
        in_train[i] = true;
    }
    let (train, test): (Vec<usize>, Vec<usize>) = (0..n_total).partition(|&i| in_train[i]);
    Ok(Partition { train, test })
}
