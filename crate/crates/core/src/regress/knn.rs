use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Unweighted k-nearest-neighbour regression under Euclidean distance.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    pub k: usize,
    rows: Vec<Vec<f64>>,
    targets: Vec<f64>,
}

impl KnnModel {
    pub fn fit(x: &DMatrix<f64>, y: &[f64], k: usize) -> Result<KnnModel> {
        if x.nrows() != y.len() {
            return Err(Error::LengthMismatch { left: x.nrows(), right: y.len() });
        }
        if k == 0 || k > y.len() {
            return Err(Error::invalid(format!(
                "k = {k} must lie in 1..={} (training size)",
                y.len()
            )));
        }
        Ok(KnnModel {
            k,
            rows: super::rows(x),
            targets: y.to_vec(),
        })
    }

    /// Training indices of the k nearest rows, nearest first; equal
    /// distances go to the lower index.
    pub fn neighbours(&self, x: &[f64]) -> Vec<usize> {
        let mut d: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let s: f64 = r.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                (s, i)
            })
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < d.len() {
            d.select_nth_unstable_by(self.k - 1, cmp);
            d.truncate(self.k);
        }
        d.sort_by(cmp);
        d.into_iter().map(|(_, i)| i).collect()
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let s: f64 = self.neighbours(x).iter().map(|&i| self.targets[i]).sum();
        s / self.k as f64
    }
}
