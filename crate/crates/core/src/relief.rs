//! RELIEF feature weighting.
//!
//! For each sampled instance the nearest same-class instance (hit) and the
//! nearest other-class instance (miss) are found under Euclidean distance on
//! the normalized features, and every feature weight moves by
//! `-diff(x, hit)^2 + diff(x, miss)^2`. Weights are averaged over the number
//! of instances used.
//!
//! The outcome is continuous, so classes are defined by cutting it into
//! equal-frequency bins (two by default).

use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;

use crate::dataset::{Dataset, FeatureId};
use crate::error::{Error, Result};
use crate::seed;

/// `(x - y) / nu`.
pub fn diff(xk: f64, yk: f64, nu_k: f64) -> Result<f64> {
    if !(nu_k > 0.0) {
        return Err(Error::invalid(format!("normalization unit {nu_k} must be positive")));
    }
    Ok((xk - yk) / nu_k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleCount {
    /// Every instance once, in row order.
    All,
    /// Draw this many instances uniformly with replacement.
    Count(usize),
}

impl std::str::FromStr for SampleCount {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(SampleCount::All);
        }
        s.parse()
            .map(SampleCount::Count)
            .map_err(|_| Error::invalid(format!("`{s}` is neither `all` nor a count")))
    }
}

impl std::fmt::Display for SampleCount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SampleCount::All => write!(f, "all"),
            SampleCount::Count(m) => write!(f, "{m}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliefOptions {
    pub m: SampleCount,
    /// Relevance threshold on the averaged weight.
    pub tau: f64,
    /// Number of equal-frequency outcome bins used as classes.
    pub bins: usize,
    pub seed: u64,
}

impl Default for ReliefOptions {
    fn default() -> Self {
        ReliefOptions {
            m: SampleCount::All,
            tau: 0.0,
            bins: 2,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReliefWeights {
    pub features: Vec<FeatureId>,
    /// Averaged weights, parallel to `features`.
    pub weights: Vec<f64>,
    /// Number of instances actually used.
    pub m: usize,
    pub tau: f64,
    pub bins: usize,
    pub seed: u64,
}

impl ReliefWeights {
    pub fn is_relevant(&self, i: usize) -> bool {
        self.weights[i] > self.tau
    }

    pub fn weight(&self, id: FeatureId) -> Option<f64> {
        self.features
            .iter()
            .position(|&f| f == id)
            .map(|i| self.weights[i])
    }

    /// Feature ids by descending weight, ties by ascending id.
    pub fn order(&self) -> Vec<FeatureId> {
        let mut idx: Vec<usize> = (0..self.features.len()).collect();
        idx.sort_by(|&a, &b| {
            self.weights[b]
                .total_cmp(&self.weights[a])
                .then(self.features[a].cmp(&self.features[b]))
        });
        idx.into_iter().map(|i| self.features[i]).collect()
    }

    /// CSV `attribute_id,weight,relevant` in ranked order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("attribute_id,weight,relevant\n");
        for id in self.order() {
            let i = self.features.iter().position(|&f| f == id).expect("own id");
            out.push_str(&format!(
                "{},{:.prec$},{}\n",
                id,
                self.weights[i],
                self.is_relevant(i),
                prec = crate::OUTPUT_DECIMALS
            ));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_csv().as_bytes())
            .map_err(|e| Error::io(path, e))
    }
}

/// Class label per sample: rank of the outcome (ties by row) cut into
/// `bins` groups of near-equal size.
pub fn equal_frequency_bins(y: &[f64], bins: usize) -> Vec<usize> {
    let n = y.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| y[a].total_cmp(&y[b]).then(a.cmp(&b)));
    let mut labels = vec![0; n];
    for (rank, &i) in order.iter().enumerate() {
        labels[i] = rank * bins / n;
    }
    labels
}

fn squared_distance(rows: &[Vec<f64>], a: usize, b: usize) -> f64 {
    rows[a]
        .iter()
        .zip(&rows[b])
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

/// Nearest hit and nearest miss of `i`; ties go to the lowest row index.
fn neighbours(rows: &[Vec<f64>], labels: &[usize], i: usize) -> (Option<usize>, Option<usize>) {
    let mut hit: Option<(f64, usize)> = None;
    let mut miss: Option<(f64, usize)> = None;
    for j in 0..rows.len() {
        if j == i {
            continue;
        }
        let d = squared_distance(rows, i, j);
        let slot = if labels[j] == labels[i] { &mut hit } else { &mut miss };
        if slot.map_or(true, |(best, _)| d < best) {
            *slot = Some((d, j));
        }
    }
    (hit.map(|h| h.1), miss.map(|m| m.1))
}

pub fn relief_rank(ds: &Dataset, opts: &ReliefOptions) -> Result<ReliefWeights> {
    if opts.bins < 2 {
        return Err(Error::invalid("RELIEF needs at least two outcome bins"));
    }
    if !(0.0..=1.0).contains(&opts.tau) {
        return Err(Error::invalid(format!("tau {} outside [0, 1]", opts.tau)));
    }
    if opts.m == SampleCount::Count(0) {
        return Err(Error::invalid("RELIEF needs at least one sampled instance"));
    }
    let n = ds.n_samples();
    if n < opts.bins {
        return Err(Error::invalid(format!(
            "{n} samples cannot fill {} bins",
            opts.bins
        )));
    }
    let features = ds.feature_ids();
    let cols = features
        .iter()
        .map(|&id| ds.feature(id))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<f64>> = (0..n).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
    let labels = equal_frequency_bins(ds.outcome(), opts.bins);

    let mut bin_sizes = vec![0usize; opts.bins];
    for &l in &labels {
        bin_sizes[l] += 1;
    }
    let usable = |i: usize| bin_sizes[labels[i]] > 1;
    if !(0..n).any(usable) {
        return Err(Error::invalid(
            "every outcome bin holds a single sample; no nearest hit exists",
        ));
    }

    let visits: Vec<usize> = match opts.m {
        SampleCount::All => (0..n).filter(|&i| usable(i)).collect(),
        SampleCount::Count(m) => {
            let mut rng = seed::rng(seed::derive(opts.seed, "relief"));
            let mut picked = Vec::with_capacity(m);
            while picked.len() < m {
                let i = rng.random_range(0..n);
                if usable(i) {
                    picked.push(i);
                }
            }
            picked
        }
    };

    let pairs: Vec<(usize, usize)> = visits
        .par_iter()
        .map(|&i| {
            let (hit, miss) = neighbours(&rows, &labels, i);
            (hit.expect("bin has another member"), miss.expect("another bin exists"))
        })
        .collect();

    let p = features.len();
    let mut w = vec![0.0; p];
    for (&i, &(hit, miss)) in visits.iter().zip(&pairs) {
        for k in 0..p {
            let dh = diff(rows[i][k], rows[hit][k], 1.0)?;
            let dm = diff(rows[i][k], rows[miss][k], 1.0)?;
            w[k] = w[k] - dh * dh + dm * dm;
        }
    }
    let m = visits.len();
    for v in &mut w {
        *v /= m as f64;
    }
    Ok(ReliefWeights {
        features,
        weights: w,
        m,
        tau: opts.tau,
        bins: opts.bins,
        seed: opts.seed,
    })
}
