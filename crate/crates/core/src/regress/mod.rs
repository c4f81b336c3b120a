//! Regressors used to score feature subsets, and their error metrics.
//!
//! Every model is fitted from a sample-by-feature matrix and a target vector
//! and is immutable afterwards, so prediction can run from many threads.

mod knn;
mod linear;
mod tree;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub use knn::KnnModel;
pub use linear::{LinearModel, RIDGE_LAMBDA};
pub use tree::{TreeModel, TreeNode, TreeOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegressorKind {
    Linear,
    Knn,
    /// Variance-reduction tree with reduced-error pruning.
    Tree,
}

impl RegressorKind {
    pub const ALL: [RegressorKind; 3] = [RegressorKind::Linear, RegressorKind::Knn, RegressorKind::Tree];

    pub fn name(self) -> &'static str {
        match self {
            RegressorKind::Linear => "linear",
            RegressorKind::Knn => "knn",
            RegressorKind::Tree => "reptree",
        }
    }

    /// Parses a comma separated list such as `linear,knn`.
    pub fn parse_list(s: &str) -> Result<Vec<RegressorKind>> {
        let mut out: Vec<RegressorKind> = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let kind = part.parse()?;
            if !out.contains(&kind) {
                out.push(kind);
            }
        }
        if out.is_empty() {
            return Err(Error::invalid("empty regressor list"));
        }
        Ok(out)
    }
}

impl fmt::Display for RegressorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RegressorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" | "ols" => Ok(RegressorKind::Linear),
            "knn" | "ibk" => Ok(RegressorKind::Knn),
            "tree" | "reptree" => Ok(RegressorKind::Tree),
            other => Err(Error::invalid(format!(
                "unknown regressor `{other}` (expected linear, knn or tree)"
            ))),
        }
    }
}

/// Hyperparameters shared by all regressors of one experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressorParams {
    pub knn_k: usize,
    pub tree: TreeOptions,
}

impl Default for RegressorParams {
    fn default() -> Self {
        RegressorParams {
            knn_k: 3,
            tree: TreeOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Model {
    Linear(LinearModel),
    Knn(KnnModel),
    Tree(TreeModel),
}

impl Model {
    pub fn fit(
        kind: RegressorKind,
        x: &DMatrix<f64>,
        y: &[f64],
        params: &RegressorParams,
        seed: u64,
    ) -> Result<Model> {
        Ok(match kind {
            RegressorKind::Linear => Model::Linear(LinearModel::fit(x, y)?),
            RegressorKind::Knn => Model::Knn(KnnModel::fit(x, y, params.knn_k)?),
            RegressorKind::Tree => Model::Tree(TreeModel::fit(x, y, &params.tree, seed)?),
        })
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        match self {
            Model::Linear(m) => m.predict(x),
            Model::Knn(m) => m.predict(x),
            Model::Tree(m) => m.predict(x),
        }
    }

    pub fn predict_rows(&self, x: &DMatrix<f64>) -> Vec<f64> {
        rows(x).iter().map(|r| self.predict(r)).collect()
    }
}

pub(crate) fn rows(x: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..x.nrows())
        .map(|r| x.row(r).iter().copied().collect())
        .collect()
}

fn check_lengths(pred: &[f64], truth: &[f64]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::invalid("error metric of an empty vector"));
    }
    Ok(())
}

/// Mean absolute error.
pub fn mae(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_lengths(pred, truth)?;
    let s: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum();
    Ok(s / pred.len() as f64)
}

/// Root mean squared error.
pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_lengths(pred, truth)?;
    let s: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok((s / pred.len() as f64).sqrt())
}
