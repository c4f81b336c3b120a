//! Ranking-then-regression experiments.
//!
//! A run ranks the features once on the full dataset, then for every
//! regressor and feature count trains on the top-ranked columns under one
//! shared k-fold plan and pools the out-of-fold predictions into MAE and
//! RMSE. Cells are independent and evaluated in parallel; the report is
//! assembled in sweep order.

mod config;
mod report;

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::cusp_ranker::{rank_features, RankOptions, RankingTable};
use crate::dataset::{load_csv, Dataset, FeatureId, FoldPlan};
use crate::error::{Error, Result};
use crate::regress::{mae, rmse, Model, RegressorKind, RegressorParams};
use crate::relief::{relief_rank, ReliefOptions};
use crate::seed;

pub use config::{parse_key_values, ErrorScale, ExperimentConfig, RankerKind, DEFAULT_COUNTS};
pub use report::{
    emit_comparison_plot_data, emit_plot_data, CellErrors, ComparisonCell, ComparisonReport,
    EvalReport, EvalRow, Provenance, Winner,
};

/// A full feature order produced by a ranker or read from a file.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureOrder {
    pub ranker: String,
    /// Every feature, best first.
    pub order: Vec<FeatureId>,
    /// Features the ranker marked as kept or relevant.
    pub kept: Vec<FeatureId>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Read a ranking written by `rank` or `relief`; the header decides which.
pub fn read_feature_order(path: &Path) -> Result<FeatureOrder> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header = text.lines().next().unwrap_or("").trim();
    if header == "attribute_id,weight,relevant" {
        let mut order = Vec::new();
        let mut kept = Vec::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || Error::Malformed {
                path: path.to_owned(),
                reason: format!("line {}: expected attribute_id,weight,relevant", i + 1),
            };
            if f.len() != 3 {
                return Err(bad());
            }
            let id: FeatureId = f[0].parse().map_err(|_| bad())?;
            order.push(id);
            match f[2] {
                "true" => kept.push(id),
                "false" => {}
                _ => return Err(bad()),
            }
        }
        return Ok(FeatureOrder { ranker: "relief".into(), order, kept });
    }
    let table = RankingTable::read_csv(path)?;
    Ok(FeatureOrder {
        ranker: "cusp".into(),
        order: table.order(),
        kept: table.kept(),
    })
}

/// Rank every feature of `ds` with the configured ranker.
pub fn compute_order(ds: &Dataset, cfg: &ExperimentConfig) -> Result<FeatureOrder> {
    match cfg.ranker {
        RankerKind::Cusp => {
            let opts = RankOptions {
                n_f: ds.n_features().saturating_sub(1).max(1),
                threshold: 0.0,
                asymmetry: cfg.asymmetry,
                seed: cfg.seed,
                fit: cfg.fit.clone(),
            };
            let table = rank_features(ds, &opts)?;
            Ok(FeatureOrder {
                ranker: "cusp".into(),
                order: table.order(),
                kept: table.kept(),
            })
        }
        RankerKind::Relief => {
            let opts = ReliefOptions {
                m: cfg.relief_m,
                tau: 0.0,
                bins: cfg.relief_bins,
                seed: cfg.seed,
            };
            let w = relief_rank(ds, &opts)?;
            let order = w.order();
            let kept = order
                .iter()
                .copied()
                .filter(|&id| w.weight(id).is_some_and(|v| v > w.tau))
                .collect();
            Ok(FeatureOrder { ranker: "relief".into(), order, kept })
        }
    }
}

fn check_order(ds: &Dataset, order: &[FeatureId]) -> Result<()> {
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != ds.feature_ids() {
        return Err(Error::invalid(format!(
            "ranking lists {} features but the dataset has {}; it must cover every feature once",
            order.len(),
            ds.n_features()
        )));
    }
    Ok(())
}

/// Pooled out-of-fold errors of one regressor on one column set.
pub fn cross_validate(
    ds: &Dataset,
    features: &[FeatureId],
    kind: RegressorKind,
    params: &RegressorParams,
    plan: &FoldPlan,
    seed: u64,
    scale: ErrorScale,
) -> Result<CellErrors> {
    let n = ds.n_samples();
    if plan.assignments.len() != n {
        return Err(Error::LengthMismatch { left: plan.assignments.len(), right: n });
    }
    let model_seed = seed::derive(seed, "regressor");
    let mut pred = vec![f64::NAN; n];
    for fold in 0..plan.n_folds {
        let (train, test) = plan.split(fold);
        let x_train = ds.feature_matrix(features, &train)?;
        let y_train = ds.outcome_at(&train);
        let model = Model::fit(kind, &x_train, &y_train, params, seed::derive_index(model_seed, fold as u64))?;
        let x_test = ds.feature_matrix(features, &test)?;
        for (&row, p) in test.iter().zip(model.predict_rows(&x_test)) {
            pred[row] = p;
        }
    }
    let mut truth = ds.outcome().to_vec();
    if scale == ErrorScale::Original {
        let s = ds.outcome_scale();
        pred.iter_mut().for_each(|v| *v = s.denormalize(*v));
        truth.iter_mut().for_each(|v| *v = s.denormalize(*v));
    }
    if pred.iter().any(|v| !v.is_finite()) {
        return Err(Error::FitFailed("non-finite prediction".into()));
    }
    Ok(CellErrors { mae: mae(&pred, &truth)?, rmse: rmse(&pred, &truth)? })
}

/// Run the sweep on an already loaded dataset.
///
/// `order` replaces ranking when given; `input_sha256` is only recorded.
pub fn run_on_dataset(
    ds: &Dataset,
    input_sha256: &str,
    cfg: &ExperimentConfig,
    order: Option<FeatureOrder>,
) -> Result<EvalReport> {
    cfg.validate()?;
    let n = ds.n_features();
    let from_file = order.is_some();
    let order = match order {
        Some(o) => o,
        None => compute_order(ds, cfg)?,
    };
    check_order(ds, &order.order)?;

    let counts = if cfg.counts.is_empty() && from_file && !order.kept.is_empty() && order.kept.len() < n {
        vec![n, order.kept.len()]
    } else {
        cfg.resolved_counts(n)?
    };
    let plan = FoldPlan::new(ds.n_samples(), cfg.folds, seed::derive(cfg.seed, "folds"))?;

    let cells: Vec<(RegressorKind, usize)> = cfg
        .regressors
        .iter()
        .flat_map(|&r| counts.iter().map(move |&c| (r, c)))
        .collect();
    let rows: Vec<EvalRow> = cells
        .par_iter()
        .map(|&(regressor, feature_count)| {
            let mut features = order.order[..feature_count].to_vec();
            features.sort_unstable();
            let result = cross_validate(ds, &features, regressor, &cfg.regressor, &plan, cfg.seed, cfg.error_scale)
                .map_err(|e| e.to_string());
            if let Err(e) = &result {
                log::warn!("{regressor} with {feature_count} features failed: {e}");
            }
            EvalRow { regressor, feature_count, features, result }
        })
        .collect();

    Ok(EvalReport {
        ranker: order.ranker,
        order: order.order,
        folds: cfg.folds,
        seed: cfg.seed,
        error_scale: cfg.error_scale,
        rows,
        provenance: Provenance {
            input_sha256: input_sha256.to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            fold_digest: plan.digest(),
            n_samples: ds.n_samples(),
            n_features: n,
            outcome: ds.outcome_name().to_owned(),
            config: cfg.echo(),
        },
    })
}

/// Load the configured input, rank (or read the ranking file) and sweep.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let ds = load_csv(&cfg.input, cfg.outcome.clone())?;
    let digest = sha256_file(&cfg.input)?;
    let order = cfg.ranking.as_deref().map(read_feature_order).transpose()?;
    run_on_dataset(&ds, &digest, cfg, order)
}

fn shared_fields(cfg: &ExperimentConfig) -> Vec<(String, String)> {
    const SHARED: [&str; 10] = [
        "input", "outcome", "regressors", "counts", "folds", "seed", "error-scale", "knn-k", "min-leaf", "holdout",
    ];
    cfg.echo()
        .into_iter()
        .filter(|(k, _)| SHARED.contains(&k.as_str()))
        .collect()
}

/// Run two configurations that differ only in how features are ranked.
pub fn compare_on_dataset(
    ds: &Dataset,
    input_sha256: &str,
    cfg_a: &ExperimentConfig,
    cfg_b: &ExperimentConfig,
) -> Result<ComparisonReport> {
    for ((k, va), (_, vb)) in shared_fields(cfg_a).into_iter().zip(shared_fields(cfg_b)) {
        if va != vb {
            return Err(Error::invalid(format!("compared runs disagree on `{k}`: `{va}` vs `{vb}`")));
        }
    }
    let load = |cfg: &ExperimentConfig| cfg.ranking.as_deref().map(read_feature_order).transpose();
    let a = run_on_dataset(ds, input_sha256, cfg_a, load(cfg_a)?)?;
    let b = run_on_dataset(ds, input_sha256, cfg_b, load(cfg_b)?)?;
    Ok(ComparisonReport::build(a, b))
}

pub fn compare_rankers(cfg_a: &ExperimentConfig, cfg_b: &ExperimentConfig) -> Result<ComparisonReport> {
    cfg_a.validate()?;
    cfg_b.validate()?;
    if cfg_a.input != cfg_b.input {
        return Err(Error::invalid("compared runs must share the input file"));
    }
    let ds = load_csv(&cfg_a.input, cfg_a.outcome.clone())?;
    let digest = sha256_file(&cfg_a.input)?;
    compare_on_dataset(&ds, &digest, cfg_a, cfg_b)
}
