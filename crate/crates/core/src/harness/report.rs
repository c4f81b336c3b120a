use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::dataset::FeatureId;
use crate::error::{Error, Result};
use crate::regress::RegressorKind;
use crate::OUTPUT_DECIMALS;

use super::config::ErrorScale;

pub(crate) const SELECTION_CAVEAT: &str = "features were ranked on the full dataset before cross-validation, \
so errors of selected subsets are optimistically biased";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellErrors {
    pub mae: f64,
    pub rmse: f64,
}

/// One (regressor, feature count) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub regressor: RegressorKind,
    pub feature_count: usize,
    /// Columns given to the regressor, ascending.
    pub features: Vec<FeatureId>,
    /// Pooled cross-validated errors, or why the cell failed.
    pub result: std::result::Result<CellErrors, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub input_sha256: String,
    pub version: String,
    pub fold_digest: String,
    pub n_samples: usize,
    pub n_features: usize,
    pub outcome: String,
    pub config: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// `cusp` or `relief`.
    pub ranker: String,
    /// Every feature, best first.
    pub order: Vec<FeatureId>,
    pub folds: usize,
    pub seed: u64,
    pub error_scale: ErrorScale,
    pub rows: Vec<EvalRow>,
    pub provenance: Provenance,
}

fn num(v: f64) -> String {
    format!("{v:.OUTPUT_DECIMALS$}")
}

fn cell_num(row: Option<&EvalRow>, pick: fn(&CellErrors) -> f64) -> String {
    match row.map(|r| &r.result) {
        Some(Ok(e)) => num(pick(e)),
        _ => "nan".into(),
    }
}

fn ids(list: &[FeatureId]) -> String {
    list.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(" ")
}

impl EvalReport {
    pub fn cell(&self, regressor: RegressorKind, count: usize) -> Option<&EvalRow> {
        self.rows
            .iter()
            .find(|r| r.regressor == regressor && r.feature_count == count)
    }

    pub fn regressors(&self) -> Vec<RegressorKind> {
        let mut out: Vec<RegressorKind> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.regressor) {
                out.push(r.regressor);
            }
        }
        out
    }

    /// Counts in sweep order (descending).
    pub fn counts(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.feature_count) {
                out.push(r.feature_count);
            }
        }
        out
    }

    pub fn failed_cells(&self) -> usize {
        self.rows.iter().filter(|r| r.result.is_err()).count()
    }

    /// `0` when every cell succeeded, `2` when some failed.
    pub fn exit_code(&self) -> i32 {
        if self.failed_cells() == 0 {
            0
        } else {
            2
        }
    }

    fn header_lines(&self) -> String {
        let p = &self.provenance;
        let mut out = String::new();
        let _ = writeln!(out, "# catastrank {}", p.version);
        let _ = writeln!(out, "# input_sha256: {}", p.input_sha256);
        let _ = writeln!(
            out,
            "# samples: {}, features: {}, outcome: {}",
            p.n_samples, p.n_features, p.outcome
        );
        let _ = writeln!(out, "# fold_digest: {}", p.fold_digest);
        let _ = writeln!(out, "# ranking: {}", ids(&self.order));
        let _ = writeln!(out, "# error_scale: {}", self.error_scale);
        let _ = writeln!(out, "# caveat: {SELECTION_CAVEAT}");
        for (k, v) in &p.config {
            let _ = writeln!(out, "# config: {k}={v}");
        }
        if self.failed_cells() > 0 {
            let _ = writeln!(out, "# partial: {} of {} cells failed", self.failed_cells(), self.rows.len());
        }
        out
    }

    /// Provenance comments followed by one row per cell.
    pub fn to_csv(&self) -> String {
        let mut out = self.header_lines();
        out.push_str("ranker,regressor,feature_count,mae,rmse,folds,seed,status\n");
        for r in &self.rows {
            let status = match &r.result {
                Ok(_) => "ok".to_owned(),
                Err(e) => format!("failed: {}", e.replace([',', '\n'], ";")),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                self.ranker,
                r.regressor,
                r.feature_count,
                cell_num(Some(r), |e| e.mae),
                cell_num(Some(r), |e| e.rmse),
                self.folds,
                self.seed,
                status
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    /// Aligned text tables of MAE and RMSE, regressors by feature count.
    pub fn to_table(&self) -> String {
        let counts = self.counts();
        let regs = self.regressors();
        let mut out = String::new();
        for (title, pick) in [("MAE", (|e: &CellErrors| e.mae) as fn(&CellErrors) -> f64), ("RMSE", |e| e.rmse)] {
            let _ = writeln!(
                out,
                "{title} ({} outcome, {}-fold CV, ranker {})",
                self.error_scale, self.folds, self.ranker
            );
            let _ = write!(out, "{:<10}", "features");
            for c in &counts {
                let _ = write!(out, " {c:>10}");
            }
            out.push('\n');
            for &reg in &regs {
                let _ = write!(out, "{:<10}", reg.name());
                for &c in &counts {
                    let _ = write!(out, " {:>10}", cell_num(self.cell(reg, c), pick));
                }
                out.push('\n');
            }
            out.push('\n');
        }
        for r in self.rows.iter().filter(|r| r.result.is_err()) {
            let _ = writeln!(
                out,
                "failed: {} with {} features: {}",
                r.regressor,
                r.feature_count,
                r.result.as_ref().unwrap_err()
            );
        }
        out
    }
}

/// Winner of one compared cell, judged on MAE.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Winner {
    A,
    B,
    Tie,
    /// At least one side failed.
    Undecided,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonCell {
    pub regressor: RegressorKind,
    pub feature_count: usize,
    pub a: Option<CellErrors>,
    pub b: Option<CellErrors>,
    pub winner: Winner,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub a: EvalReport,
    pub b: EvalReport,
    pub cells: Vec<ComparisonCell>,
}

impl ComparisonReport {
    pub(crate) fn build(a: EvalReport, b: EvalReport) -> ComparisonReport {
        let cells = a
            .rows
            .iter()
            .map(|ra| {
                let ea = ra.result.as_ref().ok().copied();
                let eb = b
                    .cell(ra.regressor, ra.feature_count)
                    .and_then(|r| r.result.as_ref().ok().copied());
                let winner = match (ea, eb) {
                    (Some(x), Some(y)) if x.mae < y.mae => Winner::A,
                    (Some(x), Some(y)) if y.mae < x.mae => Winner::B,
                    (Some(_), Some(_)) => Winner::Tie,
                    _ => Winner::Undecided,
                };
                ComparisonCell {
                    regressor: ra.regressor,
                    feature_count: ra.feature_count,
                    a: ea,
                    b: eb,
                    winner,
                }
            })
            .collect();
        ComparisonReport { a, b, cells }
    }

    /// Column labels for the two sides; equal ranker names get `_a`/`_b`.
    pub fn labels(&self) -> (String, String) {
        if self.a.ranker == self.b.ranker {
            (format!("{}_a", self.a.ranker), format!("{}_b", self.b.ranker))
        } else {
            (self.a.ranker.clone(), self.b.ranker.clone())
        }
    }

    fn winner_text(&self, w: Winner) -> String {
        let (la, lb) = self.labels();
        match w {
            Winner::A => la,
            Winner::B => lb,
            Winner::Tie => "tie".into(),
            Winner::Undecided => "n/a".into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.a.exit_code().max(self.b.exit_code())
    }

    pub fn to_csv(&self) -> String {
        let (la, lb) = self.labels();
        let mut out = self.a.header_lines();
        let _ = writeln!(out, "# ranking_{lb}: {}", ids(&self.b.order));
        let _ = writeln!(out, "regressor,feature_count,mae_{la},mae_{lb},rmse_{la},rmse_{lb},winner");
        let side = |e: Option<CellErrors>, pick: fn(&CellErrors) -> f64| e.map_or("nan".into(), |e| num(pick(&e)));
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                c.regressor,
                c.feature_count,
                side(c.a, |e| e.mae),
                side(c.b, |e| e.mae),
                side(c.a, |e| e.rmse),
                side(c.b, |e| e.rmse),
                self.winner_text(c.winner)
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn to_table(&self) -> String {
        let (la, lb) = self.labels();
        let mut out = format!(
            "MAE ({} outcome, {}-fold CV): {la} vs {lb}\n{:<10} {:>8} {:>10} {:>10}  winner\n",
            self.a.error_scale, self.a.folds, "regressor", "features", la, lb
        );
        let side = |e: Option<CellErrors>| e.map_or("nan".into(), |e| num(e.mae));
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{:<10} {:>8} {:>10} {:>10}  {}",
                c.regressor.name(),
                c.feature_count,
                side(c.a),
                side(c.b),
                self.winner_text(c.winner)
            );
        }
        out
    }
}

fn write_tsv(dir: &Path, regressor: RegressorKind, body: String) -> Result<()> {
    let path = dir.join(format!("{}.tsv", regressor.name()));
    fs::write(&path, body).map_err(|e| Error::io(&path, e))
}

/// One tab-separated file per regressor with `feature_count`, `mae` and
/// `rmse`, ascending by feature count.
pub fn emit_plot_data(report: &EvalReport, dir: &Path) -> Result<()> {
    if report.rows.is_empty() {
        return Err(Error::invalid("cannot plot an empty report"));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for reg in report.regressors() {
        let mut counts = report.counts();
        counts.sort_unstable();
        let mut body = String::from("feature_count\tmae\trmse\n");
        for c in counts {
            let row = report.cell(reg, c);
            let _ = writeln!(body, "{c}\t{}\t{}", cell_num(row, |e| e.mae), cell_num(row, |e| e.rmse));
        }
        write_tsv(dir, reg, body)?;
    }
    Ok(())
}

/// Comparison form of [`emit_plot_data`] with per-ranker columns.
pub fn emit_comparison_plot_data(report: &ComparisonReport, dir: &Path) -> Result<()> {
    if report.cells.is_empty() {
        return Err(Error::invalid("cannot plot an empty report"));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (la, lb) = report.labels();
    for reg in report.a.regressors() {
        let mut cells: Vec<&ComparisonCell> = report.cells.iter().filter(|c| c.regressor == reg).collect();
        cells.sort_by_key(|c| c.feature_count);
        let mut body = format!("feature_count\tmae_{la}\tmae_{lb}\trmse_{la}\trmse_{lb}\n");
        let side = |e: Option<CellErrors>, pick: fn(&CellErrors) -> f64| e.map_or("nan".into(), |e| num(pick(&e)));
        for c in cells {
            let _ = writeln!(
                body,
                "{}\t{}\t{}\t{}\t{}",
                c.feature_count,
                side(c.a, |e| e.mae),
                side(c.b, |e| e.mae),
                side(c.a, |e| e.rmse),
                side(c.b, |e| e.rmse)
            );
        }
        write_tsv(dir, reg, body)?;
    }
    Ok(())
}
