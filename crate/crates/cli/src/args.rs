use std::path::PathBuf;

use catastrank::harness::{ErrorScale, RankerKind};
use catastrank::{FeatureId, RegressorKind, SampleCount};
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "catastrank",
    version,
    about = "Rank features with stochastic cusp catastrophe fits and evaluate the rankings",
    args_override_self = true
)]
pub struct Cli {
    /// key=value file supplying defaults for any long flag.
    #[arg(long, global = true, value_name = "FILE", env = "CATASTRANK_CONFIG")]
    pub config: Option<PathBuf>,

    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 42, env = "CATASTRANK_SEED")]
    pub seed: u64,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "CATASTRANK_THREADS")]
    pub threads: Option<usize>,

    /// Repeat for more log output on stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank features by the AIC of per-feature cusp fits.
    Rank(RankArgs),
    /// Weight features with RELIEF.
    Relief(ReliefArgs),
    /// Write the dataset restricted to a ranking's selected features.
    Select(SelectArgs),
    /// Cross-validate regressors on the top-ranked features.
    Eval(EvalArgs),
    /// Run the evaluation for the cusp and RELIEF rankers side by side.
    Compare(CompareArgs),
    /// Print discriminant, equilibria and normalizer of one cusp.
    CuspDiag(DiagArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Input CSV with a header row.
    #[arg(long, env = "CATASTRANK_INPUT")]
    pub input: PathBuf,

    /// Outcome column: header name, 1-based position or `last`.
    #[arg(long, default_value = "last", env = "CATASTRANK_OUTCOME")]
    pub outcome: String,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Number of features to keep.
    #[arg(long, default_value_t = 1, env = "CATASTRANK_TOP")]
    pub top: usize,

    /// Candidates with 1/AIC at or below this value are dropped.
    #[arg(long, default_value_t = 0.0, env = "CATASTRANK_THRESHOLD")]
    pub threshold: f64,

    /// Feature id driving the asymmetry control (default: last feature).
    #[arg(long, env = "CATASTRANK_ASYMMETRY")]
    pub asymmetry: Option<FeatureId>,

    /// Optimizer starts per fit.
    #[arg(long, default_value_t = 5, env = "CATASTRANK_STARTS")]
    pub starts: usize,

    /// Output CSV (default: stdout).
    #[arg(long, env = "CATASTRANK_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReliefArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Instances to visit: `all` or a count drawn with replacement.
    #[arg(long, default_value = "all", env = "CATASTRANK_M")]
    pub m: SampleCount,

    /// Relevance threshold on the averaged weight.
    #[arg(long, default_value_t = 0.0, env = "CATASTRANK_TAU")]
    pub tau: f64,

    /// Equal-frequency outcome bins used as classes.
    #[arg(long, default_value_t = 2, env = "CATASTRANK_BINS")]
    pub bins: usize,

    /// Output CSV (default: stdout).
    #[arg(long, env = "CATASTRANK_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Ranking CSV written by `rank` or `relief`.
    #[arg(long, env = "CATASTRANK_RANKING")]
    pub ranking: PathBuf,

    /// Take the first N ranked features instead of the kept set.
    #[arg(long, env = "CATASTRANK_TOP")]
    pub top: Option<usize>,

    /// Output CSV.
    #[arg(long, env = "CATASTRANK_OUT")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Comma separated subset of linear, knn, tree.
    #[arg(long, default_value = "linear,knn,tree", value_delimiter = ',', value_parser = parse_regressors, env = "CATASTRANK_REGRESSORS")]
    pub regressors: Vec<RegressorKind>,

    /// Strictly decreasing feature counts (default: all, then 25,20,15,10,6,5).
    #[arg(long, value_delimiter = ',', env = "CATASTRANK_COUNTS")]
    pub counts: Vec<usize>,

    /// Cross-validation folds.
    #[arg(long, default_value_t = 10, env = "CATASTRANK_FOLDS")]
    pub folds: usize,

    /// Report errors on the `normalized` or `original` outcome scale.
    #[arg(long, default_value = "normalized", env = "CATASTRANK_ERROR_SCALE")]
    pub error_scale: ErrorScale,

    /// Feature id driving the cusp asymmetry control (default: last feature).
    #[arg(long, env = "CATASTRANK_ASYMMETRY")]
    pub asymmetry: Option<FeatureId>,

    /// Optimizer starts per cusp fit.
    #[arg(long, default_value_t = 5, env = "CATASTRANK_STARTS")]
    pub starts: usize,

    /// RELIEF instances: `all` or a count.
    #[arg(long, default_value = "all", env = "CATASTRANK_M")]
    pub m: SampleCount,

    /// RELIEF outcome bins.
    #[arg(long, default_value_t = 2, env = "CATASTRANK_BINS")]
    pub bins: usize,

    /// Neighbours for the knn regressor.
    #[arg(long, default_value_t = 3, env = "CATASTRANK_KNN_K")]
    pub knn_k: usize,

    /// Minimum training rows per tree leaf.
    #[arg(long, default_value_t = 5, env = "CATASTRANK_MIN_LEAF")]
    pub min_leaf: usize,

    /// Share of tree training rows held out for pruning.
    #[arg(long, default_value_t = 0.2, env = "CATASTRANK_HOLDOUT")]
    pub holdout: f64,

    /// Report CSV (the text table always goes to stdout).
    #[arg(long, env = "CATASTRANK_OUT")]
    pub out: Option<PathBuf>,

    /// Directory for per-regressor TSV plot data.
    #[arg(long, env = "CATASTRANK_PLOT_DIR")]
    pub plot_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,

    /// Ranker used when no ranking file is given: `cusp` or `relief`.
    #[arg(long, default_value = "cusp", env = "CATASTRANK_RANKER")]
    pub ranker: RankerKind,

    /// Use the order in this ranking CSV instead of ranking again.
    #[arg(long, env = "CATASTRANK_RANKING")]
    pub ranking: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,

    /// Precomputed cusp ranking.
    #[arg(long, env = "CATASTRANK_RANKING_CUSP")]
    pub ranking_cusp: Option<PathBuf>,

    /// Precomputed RELIEF weights.
    #[arg(long, env = "CATASTRANK_RANKING_RELIEF")]
    pub ranking_relief: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagArgs {
    /// Asymmetry control value.
    #[arg(long, allow_hyphen_values = true, env = "CATASTRANK_ALPHA")]
    pub alpha: f64,

    /// Bifurcation control value.
    #[arg(long, allow_hyphen_values = true, env = "CATASTRANK_BETA")]
    pub beta: f64,
}

fn parse_regressors(s: &str) -> Result<RegressorKind, String> {
    s.parse().map_err(|e: catastrank::Error| e.to_string())
}
