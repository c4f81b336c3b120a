//! Feature ranking by the AIC of per-feature cusp fits.
//!
//! Every candidate feature in turn drives the bifurcation control while one
//! fixed feature (the last one by default) drives the asymmetry control and
//! the outcome is the state. Each candidate is scored `1 / AIC`; candidates at
//! or below the threshold are eliminated and the best `n_f` survivors kept.
//!
//! Ordering always follows ascending AIC, which equals descending score
//! whenever every AIC is positive; a non-positive AIC is a better model than
//! any positive one and is never eliminated by the threshold.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::cusp_fit::{self, CuspRegressionSpec, FitOptions};
use crate::dataset::{Dataset, FeatureId};
use crate::error::{Error, Result};
use crate::seed;

const HEADER: &str = "attribute_id,aic,rank,kept";

#[derive(Debug, Clone)]
pub struct RankOptions {
    /// Number of features to keep.
    pub n_f: usize,
    /// Elimination threshold on `1 / AIC`.
    pub threshold: f64,
    /// Feature driving the asymmetry control; defaults to the last feature.
    pub asymmetry: Option<FeatureId>,
    pub seed: u64,
    pub fit: FitOptions,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions {
            n_f: 1,
            threshold: 0.0,
            asymmetry: None,
            seed: 42,
            fit: FitOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankEntry {
    pub feature_id: FeatureId,
    /// `None` for the asymmetry feature, `+inf` for a failed fit.
    pub aic: Option<f64>,
    /// `1 / aic`; `None` for the asymmetry feature.
    pub rank_score: Option<f64>,
    pub kept: bool,
}

impl RankEntry {
    fn csv_row(&self) -> String {
        let num = |v: Option<f64>| match v {
            Some(x) => format!("{x:.prec$}", prec = crate::OUTPUT_DECIMALS),
            None => "n/a".to_owned(),
        };
        format!(
            "{},{},{},{}",
            self.feature_id,
            num(self.aic),
            num(self.rank_score),
            self.kept
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingTable {
    /// Ranked candidates best first, then the asymmetry feature.
    pub entries: Vec<RankEntry>,
    pub threshold: f64,
    pub n_requested: usize,
    pub asymmetry_feature: FeatureId,
}

impl RankingTable {
    /// Every feature, best first; the asymmetry feature comes last.
    pub fn order(&self) -> Vec<FeatureId> {
        self.entries.iter().map(|e| e.feature_id).collect()
    }

    pub fn kept(&self) -> Vec<FeatureId> {
        self.entries
            .iter()
            .filter(|e| e.kept)
            .map(|e| e.feature_id)
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(HEADER);
        out.push('\n');
        for e in &self.entries {
            out.push_str(&e.csv_row());
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_csv().as_bytes())
            .map_err(|e| Error::io(path, e))
    }

    /// Read a table written by [`RankingTable::write_csv`].
    ///
    /// The file does not store the threshold; it is read back as `0` and
    /// `n_requested` as the number of kept rows.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let malformed = |reason: String| Error::Malformed {
            path: path.to_owned(),
            reason,
        };
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == HEADER => {}
            _ => return Err(malformed(format!("expected header `{HEADER}`"))),
        }
        let mut entries = Vec::new();
        let mut asymmetry = None;
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(malformed(format!("line {}: expected 4 fields", i + 2)));
            }
            let feature_id: FeatureId = fields[0].parse()?;
            let num = |s: &str| -> Result<Option<f64>> {
                if s == "n/a" {
                    return Ok(None);
                }
                s.parse::<f64>()
                    .map(Some)
                    .map_err(|_| malformed(format!("line {}: bad number `{s}`", i + 2)))
            };
            let aic = num(fields[1])?;
            let rank_score = num(fields[2])?;
            let kept = match fields[3] {
                "true" => true,
                "false" => false,
                other => return Err(malformed(format!("line {}: bad flag `{other}`", i + 2))),
            };
            if aic.is_none() {
                asymmetry = Some(feature_id);
            }
            entries.push(RankEntry {
                feature_id,
                aic,
                rank_score,
                kept,
            });
        }
        let asymmetry_feature = asymmetry
            .or_else(|| entries.last().map(|e| e.feature_id))
            .ok_or_else(|| malformed("no entries".into()))?;
        Ok(RankingTable {
            n_requested: entries.iter().filter(|e| e.kept).count(),
            entries,
            threshold: 0.0,
            asymmetry_feature,
        })
    }
}

pub fn export_ranking(rt: &RankingTable, path: &Path) -> Result<()> {
    rt.write_csv(path)
}

/// Fit one cusp model per candidate feature and rank them.
///
/// Fits run in parallel; each candidate's optimizer seed depends only on the
/// run seed and its feature id, so the table is the same for any thread
/// count and does not change when other features are removed.
pub fn rank_features(ds: &Dataset, opts: &RankOptions) -> Result<RankingTable> {
    let n = ds.n_features();
    if n < 2 {
        return Err(Error::invalid("ranking needs at least two features"));
    }
    if opts.n_f < 1 || opts.n_f >= n {
        return Err(Error::invalid(format!(
            "number of kept features {} outside 1..{n}",
            opts.n_f
        )));
    }
    if !(opts.threshold >= 0.0) {
        return Err(Error::invalid("threshold must be non-negative"));
    }
    let asymmetry = opts.asymmetry.unwrap_or_else(|| ds.last_feature());
    if !ds.has_feature(asymmetry) {
        return Err(Error::UnknownFeature(asymmetry.0));
    }
    let fit_seed = seed::derive(opts.seed, "cusp-fit");
    let candidates: Vec<FeatureId> = ds
        .feature_ids()
        .into_iter()
        .filter(|&id| id != asymmetry)
        .collect();

    let aics: Vec<f64> = candidates
        .par_iter()
        .map(|&id| {
            let spec = CuspRegressionSpec::for_feature(id, asymmetry);
            let seed = seed::derive_index(fit_seed, id.0 as u64);
            match cusp_fit::fit(ds, &spec, None, seed, &opts.fit) {
                Ok(fit) => {
                    if !fit.converged {
                        log::warn!(
                            "feature {id}: cusp fit stopped after {} iterations (|grad| = {:.3e})",
                            fit.iterations,
                            fit.grad_norm
                        );
                    }
                    fit.aic
                }
                Err(e) => {
                    log::warn!("feature {id}: {e}");
                    f64::INFINITY
                }
            }
        })
        .collect();

    if aics.iter().all(|a| !a.is_finite()) {
        return Err(Error::FitFailed("every per-feature cusp fit failed".into()));
    }

    let mut ranked: Vec<(FeatureId, f64)> = candidates.into_iter().zip(aics).collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));

    let mut kept_count = 0;
    let mut entries: Vec<RankEntry> = ranked
        .into_iter()
        .map(|(feature_id, aic)| {
            let score = 1.0 / aic;
            let survives = aic.is_finite() && (aic <= 0.0 || score > opts.threshold);
            let kept = survives && kept_count < opts.n_f;
            if kept {
                kept_count += 1;
            }
            RankEntry {
                feature_id,
                aic: Some(aic),
                rank_score: Some(score),
                kept,
            }
        })
        .collect();
    entries.push(RankEntry {
        feature_id: asymmetry,
        aic: None,
        rank_score: None,
        kept: false,
    });

    Ok(RankingTable {
        entries,
        threshold: opts.threshold,
        n_requested: opts.n_f,
        asymmetry_feature: asymmetry,
    })
}
