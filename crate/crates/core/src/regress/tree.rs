use nalgebra::DMatrix;
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeOptions {
    pub min_leaf: usize,
    /// Share of the training rows set aside for pruning.
    pub holdout: f64,
}

impl Default for TreeOptions {
    fn default() -> Self {
        TreeOptions {
            min_leaf: 5,
            holdout: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf {
        mean: f64,
        n: usize,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        mean: f64,
        n: usize,
    },
}

/// Regression tree grown on variance reduction and pruned on a holdout.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeModel {
    /// Arena with the root at index 0.
    pub nodes: Vec<TreeNode>,
    /// Internal nodes collapsed by pruning.
    pub pruned: usize,
    pub grow_size: usize,
    pub holdout_size: usize,
}

enum Grown {
    Leaf { mean: f64, n: usize },
    Split { feature: usize, threshold: f64, left: Box<Grown>, right: Box<Grown>, mean: f64, n: usize },
}

impl Grown {
    fn mean(&self) -> f64 {
        match self {
            Grown::Leaf { mean, .. } | Grown::Split { mean, .. } => *mean,
        }
    }
}

fn mean_of(y: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64
}

struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

fn best_split(rows: &[Vec<f64>], y: &[f64], idx: &[usize], min_leaf: usize) -> Option<Candidate> {
    let n = idx.len();
    if n < 2 * min_leaf {
        return None;
    }
    let centre = mean_of(y, idx);
    let parent: f64 = idx.iter().map(|&i| (y[i] - centre).powi(2)).sum();
    // Rounding noise of an exactly constant target is not variance.
    if parent <= 1e-24 * n as f64 * (1.0 + centre * centre) {
        return None;
    }
    let total: f64 = idx.iter().map(|&i| y[i] - centre).sum();
    let p = rows[idx[0]].len();
    let mut best: Option<Candidate> = None;
    let mut order = idx.to_vec();
    for f in 0..p {
        order.sort_by(|&a, &b| rows[a][f].total_cmp(&rows[b][f]).then(a.cmp(&b)));
        let (mut s, mut s2) = (0.0, 0.0);
        let total2 = parent;
        for pos in 0..n - 1 {
            let d = y[order[pos]] - centre;
            s += d;
            s2 += d * d;
            let nl = pos + 1;
            let nr = n - nl;
            if nl < min_leaf || nr < min_leaf {
                continue;
            }
            let (lo, hi) = (rows[order[pos]][f], rows[order[pos + 1]][f]);
            if lo >= hi {
                continue;
            }
            let sse_l = s2 - s * s / nl as f64;
            let sr = total - s;
            let sse_r = (total2 - s2) - sr * sr / nr as f64;
            let gain = parent - sse_l - sse_r;
            if gain > 1e-12 * parent && best.as_ref().map_or(true, |b| gain > b.gain) {
                let mid = 0.5 * (lo + hi);
                let threshold = if mid < hi { mid } else { lo };
                best = Some(Candidate { feature: f, threshold, gain });
            }
        }
    }
    best
}

fn grow(rows: &[Vec<f64>], y: &[f64], idx: &[usize], min_leaf: usize) -> Grown {
    let mean = mean_of(y, idx);
    let n = idx.len();
    match best_split(rows, y, idx, min_leaf) {
        None => Grown::Leaf { mean, n },
        Some(c) => {
            let (l, r): (Vec<usize>, Vec<usize>) =
                idx.iter().partition(|&&i| rows[i][c.feature] <= c.threshold);
            Grown::Split {
                feature: c.feature,
                threshold: c.threshold,
                left: Box::new(grow(rows, y, &l, min_leaf)),
                right: Box::new(grow(rows, y, &r, min_leaf)),
                mean,
                n,
            }
        }
    }
}

/// Bottom-up reduced-error pruning. Returns the holdout SSE of the
/// (possibly collapsed) subtree.
fn prune(node: &mut Grown, rows: &[Vec<f64>], y: &[f64], hold: &[usize], pruned: &mut usize) -> f64 {
    let leaf_sse: f64 = hold.iter().map(|&i| (y[i] - node.mean()).powi(2)).sum();
    let Grown::Split { feature, threshold, left, right, mean, n } = node else {
        return leaf_sse;
    };
    let (hl, hr): (Vec<usize>, Vec<usize>) = hold.iter().partition(|&&i| rows[i][*feature] <= *threshold);
    let subtree_sse = prune(left, rows, y, &hl, pruned) + prune(right, rows, y, &hr, pruned);
    if leaf_sse <= subtree_sse {
        *pruned += 1;
        *node = Grown::Leaf { mean: *mean, n: *n };
        leaf_sse
    } else {
        subtree_sse
    }
}

fn flatten(node: Grown, out: &mut Vec<TreeNode>) -> usize {
    let at = out.len();
    match node {
        Grown::Leaf { mean, n } => out.push(TreeNode::Leaf { mean, n }),
        Grown::Split { feature, threshold, left, right, mean, n } => {
            out.push(TreeNode::Leaf { mean, n });
            let l = flatten(*left, out);
            let r = flatten(*right, out);
            out[at] = TreeNode::Split { feature, threshold, left: l, right: r, mean, n };
        }
    }
    at
}

impl TreeModel {
    pub fn fit(x: &DMatrix<f64>, y: &[f64], opts: &TreeOptions, seed: u64) -> Result<TreeModel> {
        let n = x.nrows();
        if n != y.len() {
            return Err(Error::LengthMismatch { left: n, right: y.len() });
        }
        if n == 0 {
            return Err(Error::invalid("cannot fit a tree to zero samples"));
        }
        if opts.min_leaf == 0 {
            return Err(Error::invalid("min_leaf must be at least 1"));
        }
        if !(opts.holdout > 0.0 && opts.holdout < 0.5) {
            return Err(Error::invalid(format!("holdout fraction {} outside (0, 0.5)", opts.holdout)));
        }
        let rows = super::rows(x);
        let all: Vec<usize> = (0..n).collect();
        if n < 2 * opts.min_leaf {
            return Ok(TreeModel {
                nodes: vec![TreeNode::Leaf { mean: mean_of(y, &all), n }],
                pruned: 0,
                grow_size: n,
                holdout_size: 0,
            });
        }
        let mut shuffled = all;
        shuffled.shuffle(&mut seed::rng(seed::derive(seed, "tree-holdout")));
        let n_hold = ((n as f64) * opts.holdout).floor() as usize;
        let (hold, grow_set) = shuffled.split_at(n_hold);
        let mut grow_idx = grow_set.to_vec();
        grow_idx.sort_unstable();
        let mut hold_idx = hold.to_vec();
        hold_idx.sort_unstable();

        let mut root = grow(&rows, y, &grow_idx, opts.min_leaf);
        let mut pruned = 0;
        prune(&mut root, &rows, y, &hold_idx, &mut pruned);
        let mut nodes = Vec::new();
        flatten(root, &mut nodes);
        Ok(TreeModel {
            nodes,
            pruned,
            grow_size: grow_idx.len(),
            holdout_size: hold_idx.len(),
        })
    }

    /// Arena index of the leaf that `x` falls into.
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { .. } => return at,
                TreeNode::Split { feature, threshold, left, right, .. } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        match &self.nodes[self.leaf_index(x)] {
            TreeNode::Leaf { mean, .. } => *mean,
            TreeNode::Split { .. } => unreachable!(),
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Leaf { .. })).count()
    }
}
