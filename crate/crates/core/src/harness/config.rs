use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::cusp_fit::FitOptions;
use crate::dataset::{FeatureId, OutcomeSelector};
use crate::error::{Error, Result};
use crate::regress::{RegressorKind, RegressorParams};
use crate::relief::SampleCount;

/// Feature counts tried below the full set when none are given.
pub const DEFAULT_COUNTS: [usize; 6] = [25, 20, 15, 10, 6, 5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RankerKind {
    Cusp,
    Relief,
}

impl RankerKind {
    pub fn name(self) -> &'static str {
        match self {
            RankerKind::Cusp => "cusp",
            RankerKind::Relief => "relief",
        }
    }
}

impl fmt::Display for RankerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RankerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cusp" => Ok(RankerKind::Cusp),
            "relief" => Ok(RankerKind::Relief),
            other => Err(Error::invalid(format!("unknown ranker `{other}` (expected cusp or relief)"))),
        }
    }
}

/// Scale on which regression errors are reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorScale {
    /// The min-max normalized outcome in `[0, 1]`.
    #[default]
    Normalized,
    /// The outcome in its input units.
    Original,
}

impl fmt::Display for ErrorScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorScale::Normalized => "normalized",
            ErrorScale::Original => "original",
        })
    }
}

impl FromStr for ErrorScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "normalized" => Ok(ErrorScale::Normalized),
            "original" => Ok(ErrorScale::Original),
            other => Err(Error::invalid(format!(
                "unknown error scale `{other}` (expected normalized or original)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub input: PathBuf,
    pub outcome: OutcomeSelector,
    pub ranker: RankerKind,
    /// Read the feature order from a ranking CSV instead of ranking.
    pub ranking: Option<PathBuf>,
    pub regressors: Vec<RegressorKind>,
    /// Strictly decreasing; empty means the full set plus [`DEFAULT_COUNTS`].
    pub counts: Vec<usize>,
    pub folds: usize,
    pub seed: u64,
    pub error_scale: ErrorScale,
    pub asymmetry: Option<FeatureId>,
    pub fit: FitOptions,
    pub relief_m: SampleCount,
    pub relief_bins: usize,
    pub regressor: RegressorParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            input: PathBuf::new(),
            outcome: OutcomeSelector::Last,
            ranker: RankerKind::Cusp,
            ranking: None,
            regressors: RegressorKind::ALL.to_vec(),
            counts: Vec::new(),
            folds: 10,
            seed: 42,
            error_scale: ErrorScale::Normalized,
            asymmetry: None,
            fit: FitOptions::default(),
            relief_m: SampleCount::All,
            relief_bins: 2,
            regressor: RegressorParams::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("`{key}`: cannot parse `{value}`")))
}

/// Split `key=value` lines; `#` starts a comment, blank lines are skipped.
/// Keys are returned with `_` replaced by `-`.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("config line {}: expected key=value", i + 1)))?;
        out.push((k.trim().replace('_', "-"), v.trim().to_owned()));
    }
    Ok(out)
}

impl ExperimentConfig {
    /// Set one option by its command-line name (`-` or `_` separated).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        let v = value.trim();
        match key.as_str() {
            "input" => self.input = PathBuf::from(v),
            "outcome" => self.outcome = OutcomeSelector::parse(v),
            "ranker" => self.ranker = parse(&key, v)?,
            "ranking" => self.ranking = (!v.is_empty()).then(|| PathBuf::from(v)),
            "regressors" => self.regressors = RegressorKind::parse_list(v)?,
            "counts" => {
                self.counts = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| parse(&key, s))
                    .collect::<Result<_>>()?
            }
            "folds" => self.folds = parse(&key, v)?,
            "seed" => self.seed = parse(&key, v)?,
            "error-scale" => self.error_scale = parse(&key, v)?,
            "asymmetry" => {
                self.asymmetry = match v {
                    "" | "last" => None,
                    _ => Some(parse(&key, v)?),
                }
            }
            "starts" => self.fit.starts = parse(&key, v)?,
            "m" => self.relief_m = parse(&key, v)?,
            "bins" => self.relief_bins = parse(&key, v)?,
            "k" | "knn-k" => self.regressor.knn_k = parse(&key, v)?,
            "min-leaf" => self.regressor.tree.min_leaf = parse(&key, v)?,
            "holdout" => self.regressor.tree.holdout = parse(&key, v)?,
            _ => return Err(Error::invalid(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Apply a `key=value` config text on top of `self`.
    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (k, v) in parse_key_values(text)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    /// Every option as `key=value`, in a fixed order that [`set`] accepts.
    ///
    /// [`set`]: ExperimentConfig::set
    pub fn echo(&self) -> Vec<(String, String)> {
        let regs: Vec<&str> = self.regressors.iter().map(|r| r.name()).collect();
        let counts: Vec<String> = self.counts.iter().map(usize::to_string).collect();
        let pairs = [
            ("input", self.input.display().to_string()),
            ("outcome", self.outcome.to_string()),
            ("ranker", self.ranker.to_string()),
            ("ranking", self.ranking.as_ref().map(|p| p.display().to_string()).unwrap_or_default()),
            ("regressors", regs.join(",")),
            ("counts", counts.join(",")),
            ("folds", self.folds.to_string()),
            ("seed", self.seed.to_string()),
            ("error-scale", self.error_scale.to_string()),
            ("asymmetry", self.asymmetry.map_or("last".into(), |a| a.to_string())),
            ("starts", self.fit.starts.to_string()),
            ("m", self.relief_m.to_string()),
            ("bins", self.relief_bins.to_string()),
            ("knn-k", self.regressor.knn_k.to_string()),
            ("min-leaf", self.regressor.tree.min_leaf.to_string()),
            ("holdout", self.regressor.tree.holdout.to_string()),
        ];
        pairs.into_iter().map(|(k, v)| (k.to_owned(), v)).collect()
    }

    /// Counts to sweep for a dataset with `n` features.
    pub fn resolved_counts(&self, n: usize) -> Result<Vec<usize>> {
        let counts = if self.counts.is_empty() {
            std::iter::once(n)
                .chain(DEFAULT_COUNTS.iter().copied().filter(|&c| c < n))
                .collect()
        } else {
            self.counts.clone()
        };
        if counts.iter().any(|&c| c == 0 || c > n) {
            return Err(Error::invalid(format!("feature counts must lie in 1..={n}")));
        }
        if counts.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::invalid("feature counts must be strictly decreasing"));
        }
        Ok(counts)
    }

    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::invalid("at least two folds are required"));
        }
        if self.regressors.is_empty() {
            return Err(Error::invalid("no regressors selected"));
        }
        if self.fit.starts == 0 {
            return Err(Error::invalid("at least one optimizer start is required"));
        }
        Ok(())
    }
}
