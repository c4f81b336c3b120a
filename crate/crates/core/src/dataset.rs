//! Numeric tables with a designated outcome column.
//!
//! Every column is min-max normalized to `[0, 1]` when the dataset is built.
//! The raw values are kept alongside so results can be reported on the
//! original scale and subsets can be written back out without rounding.
//! Features are addressed by 1-based [`FeatureId`]s assigned in column order,
//! skipping the outcome; the ids survive [`Dataset::select_features`].

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::seed;

/// Minimum number of rows a dataset must hold.
pub const MIN_SAMPLES: usize = 4;

/// 1-based identifier of a non-outcome column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FeatureId(pub usize);

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for FeatureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let id: usize = s
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("`{s}` is not a feature id")))?;
        if id == 0 {
            return Err(Error::invalid("feature ids are 1-based"));
        }
        Ok(FeatureId(id))
    }
}

/// How the outcome column is chosen.
///
/// A string that names a header column wins; otherwise an integer is read as
/// a 1-based column position. [`OutcomeSelector::Last`] is the default.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum OutcomeSelector {
    #[default]
    Last,
    Name(String),
    Position(usize),
}

impl OutcomeSelector {
    pub fn parse(s: &str) -> Self {
        let s = s.trim();
        if s.eq_ignore_ascii_case("last") || s.is_empty() {
            return OutcomeSelector::Last;
        }
        match s.parse::<usize>() {
            Ok(pos) => OutcomeSelector::Position(pos),
            Err(_) => OutcomeSelector::Name(s.to_owned()),
        }
    }

    fn resolve(&self, names: &[String]) -> Result<usize> {
        match self {
            OutcomeSelector::Last => Ok(names.len() - 1),
            OutcomeSelector::Name(name) => names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::UnknownColumn(name.clone())),
            OutcomeSelector::Position(pos) => {
                if let Some(i) = names.iter().position(|n| *n == pos.to_string()) {
                    return Ok(i);
                }
                if *pos == 0 || *pos > names.len() {
                    return Err(Error::UnknownColumn(pos.to_string()));
                }
                Ok(pos - 1)
            }
        }
    }
}

impl fmt::Display for OutcomeSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeSelector::Last => write!(f, "last"),
            OutcomeSelector::Name(n) => write!(f, "{n}"),
            OutcomeSelector::Position(p) => write!(f, "{p}"),
        }
    }
}

/// Min-max scaling recorded for one column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnScale {
    pub min: f64,
    pub max: f64,
}

impl ColumnScale {
    pub fn is_constant(&self) -> bool {
        self.max <= self.min
    }

    pub fn normalize(&self, x: f64) -> f64 {
        if self.is_constant() {
            0.0
        } else {
            (x - self.min) / (self.max - self.min)
        }
    }

    /// Inverse of [`ColumnScale::normalize`]; constant columns map back to `min`.
    pub fn denormalize(&self, v: f64) -> f64 {
        if self.is_constant() {
            self.min
        } else {
            v * (self.max - self.min) + self.min
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Column {
    name: String,
    raw: Vec<f64>,
    values: Vec<f64>,
    scale: ColumnScale,
}

impl Column {
    fn new(name: String, raw: Vec<f64>) -> Self {
        let (min, max) = raw
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            });
        let scale = ColumnScale { min, max };
        let values = raw.iter().map(|&x| scale.normalize(x)).collect();
        Column {
            name,
            raw,
            values,
            scale,
        }
    }
}

/// Immutable, normalized numeric table.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    outcome: usize,
    /// `(id, column index)` in presentation order.
    features: Vec<(FeatureId, usize)>,
    n_samples: usize,
}

impl Dataset {
    /// Build a dataset from raw column vectors, normalizing every column.
    ///
    /// Feature ids are assigned `1..` in column order, skipping the outcome.
    pub fn from_columns(
        names: Vec<String>,
        raw: Vec<Vec<f64>>,
        outcome: OutcomeSelector,
    ) -> Result<Self> {
        if names.len() != raw.len() {
            return Err(Error::LengthMismatch {
                left: names.len(),
                right: raw.len(),
            });
        }
        if names.len() < 2 {
            return Err(Error::InvalidDataset(format!(
                "need at least 2 columns, found {}",
                names.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidDataset(format!(
                    "duplicate column name `{name}`"
                )));
            }
        }
        let n_samples = raw[0].len();
        if let Some(col) = raw.iter().find(|c| c.len() != n_samples) {
            return Err(Error::LengthMismatch {
                left: n_samples,
                right: col.len(),
            });
        }
        if n_samples < MIN_SAMPLES {
            return Err(Error::InvalidDataset(format!(
                "need at least {MIN_SAMPLES} rows, found {n_samples}"
            )));
        }
        for (name, col) in names.iter().zip(&raw) {
            if let Some(x) = col.iter().find(|x| !x.is_finite()) {
                return Err(Error::InvalidDataset(format!(
                    "column `{name}` holds non-finite value {x}"
                )));
            }
        }
        let outcome = outcome.resolve(&names)?;
        let columns: Vec<Column> = names
            .into_iter()
            .zip(raw)
            .map(|(name, raw)| Column::new(name, raw))
            .collect();
        let features = (0..columns.len())
            .filter(|&c| c != outcome)
            .enumerate()
            .map(|(i, c)| (FeatureId(i + 1), c))
            .collect();
        Ok(Dataset {
            columns,
            outcome,
            features,
            n_samples,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn feature_ids(&self) -> Vec<FeatureId> {
        self.features.iter().map(|&(id, _)| id).collect()
    }

    pub fn has_feature(&self, id: FeatureId) -> bool {
        self.features.iter().any(|&(f, _)| f == id)
    }

    /// The feature with the highest position, used as default asymmetry control.
    pub fn last_feature(&self) -> FeatureId {
        self.features.last().map(|&(id, _)| id).expect("non-empty")
    }

    fn column_of(&self, id: FeatureId) -> Result<&Column> {
        self.features
            .iter()
            .find(|&&(f, _)| f == id)
            .map(|&(_, c)| &self.columns[c])
            .ok_or(Error::UnknownFeature(id.0))
    }

    /// Normalized values of a feature.
    pub fn feature(&self, id: FeatureId) -> Result<&[f64]> {
        self.column_of(id).map(|c| c.values.as_slice())
    }

    pub fn feature_raw(&self, id: FeatureId) -> Result<&[f64]> {
        self.column_of(id).map(|c| c.raw.as_slice())
    }

    pub fn feature_name(&self, id: FeatureId) -> Result<&str> {
        self.column_of(id).map(|c| c.name.as_str())
    }

    pub fn feature_scale(&self, id: FeatureId) -> Result<ColumnScale> {
        self.column_of(id).map(|c| c.scale)
    }

    /// Normalized outcome values.
    pub fn outcome(&self) -> &[f64] {
        &self.columns[self.outcome].values
    }

    pub fn outcome_raw(&self) -> &[f64] {
        &self.columns[self.outcome].raw
    }

    pub fn outcome_name(&self) -> &str {
        &self.columns[self.outcome].name
    }

    pub fn outcome_scale(&self) -> ColumnScale {
        self.columns[self.outcome].scale
    }

    /// Names of all columns flagged constant (normalized to all zeros).
    pub fn constant_columns(&self) -> Vec<&str> {
        self.columns
            .iter()
            .filter(|c| c.scale.is_constant())
            .map(|c| c.name.as_str())
            .collect()
    }

    /// Keep the outcome plus the listed features, in the listed order.
    pub fn select_features(&self, keep: &[FeatureId]) -> Result<Dataset> {
        if keep.is_empty() {
            return Err(Error::invalid("feature selection must not be empty"));
        }
        let mut seen = HashSet::new();
        let mut columns = Vec::with_capacity(keep.len() + 1);
        let mut features = Vec::with_capacity(keep.len());
        for &id in keep {
            if !seen.insert(id) {
                return Err(Error::invalid(format!("feature id {id} listed twice")));
            }
            let col = self.column_of(id)?.clone();
            features.push((id, columns.len()));
            columns.push(col);
        }
        let outcome = columns.len();
        columns.push(self.columns[self.outcome].clone());
        Ok(Dataset {
            columns,
            outcome,
            features,
            n_samples: self.n_samples,
        })
    }

    /// Row-major matrix of normalized feature values for `rows`, columns in `ids` order.
    pub fn feature_matrix(&self, ids: &[FeatureId], rows: &[usize]) -> Result<DMatrix<f64>> {
        let cols = ids
            .iter()
            .map(|&id| self.feature(id))
            .collect::<Result<Vec<_>>>()?;
        Ok(DMatrix::from_fn(rows.len(), cols.len(), |r, c| {
            cols[c][rows[r]]
        }))
    }

    pub fn outcome_at(&self, rows: &[usize]) -> Vec<f64> {
        let y = self.outcome();
        rows.iter().map(|&r| y[r]).collect()
    }

    /// Write raw values as CSV: selected features in order, outcome last.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let order: Vec<&Column> = self
            .features
            .iter()
            .map(|&(_, c)| &self.columns[c])
            .chain(std::iter::once(&self.columns[self.outcome]))
            .collect();
        let header: Vec<&str> = order.iter().map(|c| c.name.as_str()).collect();
        let write = |out: &mut BufWriter<File>, line: String| {
            writeln!(out, "{line}").map_err(|e| Error::io(path, e))
        };
        write(&mut out, header.join(","))?;
        for r in 0..self.n_samples {
            let row: Vec<String> = order.iter().map(|c| format!("{}", c.raw[r])).collect();
            write(&mut out, row.join(","))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }
}

/// Read a headered, comma-delimited numeric CSV file and normalize it.
pub fn load_csv(path: impl AsRef<Path>, outcome: OutcomeSelector) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let csv_err = |source| Error::Csv {
        path: path.to_owned(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let names: Vec<String> = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut raw = vec![Vec::new(); names.len()];
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        for (c, cell) in record.iter().enumerate() {
            let value = cell
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::NonNumericCell {
                    line,
                    column: names[c].clone(),
                    value: cell.to_owned(),
                })?;
            raw[c].push(value);
        }
    }
    Dataset::from_columns(names, raw, outcome)
}

/// Assignment of samples to cross-validation folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub n_folds: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    /// Random partition into `n_folds` folds whose sizes differ by at most one.
    pub fn new(n_samples: usize, n_folds: usize, seed: u64) -> Result<Self> {
        if n_folds < 2 || n_folds > n_samples {
            return Err(Error::invalid(format!(
                "fold count {n_folds} outside 2..={n_samples}"
            )));
        }
        let mut order: Vec<usize> = (0..n_samples).collect();
        order.shuffle(&mut seed::rng(seed));
        let mut assignments = vec![0; n_samples];
        for (pos, &sample) in order.iter().enumerate() {
            assignments[sample] = pos % n_folds;
        }
        Ok(FoldPlan {
            n_folds,
            assignments,
            seed,
        })
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_folds];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }

    /// `(train, test)` sample indices for one fold, each ascending.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.assignments.len()).partition(|&i| self.assignments[i] != fold)
    }

    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for &a in &self.assignments {
            hasher.update((a as u64).to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

pub fn make_folds(ds: &Dataset, n_folds: usize, seed: u64) -> Result<FoldPlan> {
    FoldPlan::new(ds.n_samples(), n_folds, seed)
}
