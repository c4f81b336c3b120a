//! Feature ranking with the stochastic cusp catastrophe.
//!
//! Each candidate feature is used as the bifurcation control of a cusp model
//! whose state variable is the outcome; features are ranked by the reciprocal
//! AIC of the fitted model. A RELIEF ranker, three simple regressors and a
//! cross-validation harness are included so a ranking can be evaluated by the
//! error of regressions trained on its top features.
//!
//! Module map:
//!
//! - [`dataset`]: CSV loading, min-max normalization, folds, column selection.
//! - [`cusp_model`]: potential, equilibria, density and its normalizer.
//! - [`cusp_fit`]: maximum-likelihood fitting of the linear control mappings.
//! - [`cusp_ranker`]: per-feature fits, AIC ranking, threshold, top-N selection.
//! - [`relief`]: the RELIEF weighting baseline.
//! - [`regress`]: OLS, k-nearest-neighbour and pruned regression tree.
//! - [`harness`]: experiment sweeps, ranker comparison and report output.

pub mod cusp_fit;
pub mod cusp_model;
pub mod cusp_ranker;
pub mod dataset;
mod error;
pub mod harness;
pub mod optim;
pub mod quadrature;
pub mod regress;
pub mod relief;
pub mod seed;

pub use cusp_fit::{
    aic, aic_of, fit, ColumnRef, CuspCoefficients, CuspDesign, CuspFit, CuspRegressionSpec,
    FitOptions, StateMap,
};
pub use cusp_model::{CuspParams, EquilibriumSet, Stability};
pub use cusp_ranker::{rank_features, RankEntry, RankOptions, RankingTable};
pub use dataset::{Dataset, FeatureId, FoldPlan, OutcomeSelector};
pub use error::{Error, Result};
pub use harness::{
    compare_rankers, run_experiment, ComparisonReport, ErrorScale, EvalReport, ExperimentConfig,
    RankerKind,
};
pub use regress::{mae, rmse, RegressorKind};
pub use relief::{relief_rank, ReliefOptions, ReliefWeights, SampleCount};

/// Number of decimals used for every numeric value written to reports.
pub const OUTPUT_DECIMALS: usize = 6;
