use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ObjectiveSample;
use crate::{seed, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RfParams {
    pub n_trees: usize,
    /// Resample the training set with replacement per tree.
    pub bootstrap: bool,
}

impl Default for RfParams {
    fn default() -> Self {
        Self {
            n_trees: 50,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Fully grown regression tree; splits minimize the summed squared error
/// of the two children.
#[derive(Debug, Clone)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn fit(xs: &[&[f64]], ys: &[f64], rows: Vec<usize>) -> Self {
        let mut tree = Tree { nodes: Vec::new() };
        tree.grow(xs, ys, rows);
        tree
    }

    fn grow(&mut self, xs: &[&[f64]], ys: &[f64], rows: Vec<usize>) -> usize {
        let id = self.nodes.len();
        let first = ys[rows[0]];
        let mean = if rows.iter().all(|&r| ys[r] == first) {
            first
        } else {
            rows.iter().map(|&r| ys[r]).sum::<f64>() / rows.len() as f64
        };
        self.nodes.push(Node::Leaf(mean));
        let Some((feature, threshold)) = best_split(xs, ys, &rows) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) =
            rows.into_iter().partition(|&i| xs[i][feature] <= threshold);
        let left = self.grow(xs, ys, l);
        let right = self.grow(xs, ys, r);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }

    fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }
}

/// Lowest-SSE split over all features, or `None` when the node is pure or
/// its inputs are identical.
fn best_split(xs: &[&[f64]], ys: &[f64], rows: &[usize]) -> Option<(usize, f64)> {
    let first = ys[rows[0]];
    if rows.iter().all(|&r| ys[r] == first) {
        return None;
    }
    let n = rows.len();
    let total: f64 = rows.iter().map(|&r| ys[r]).sum();
    let total_sq: f64 = rows.iter().map(|&r| ys[r] * ys[r]).sum();
    let mut best: Option<(f64, usize, f64)> = None;
    let mut order = rows.to_vec();
    let dims = xs[rows[0]].len();
    #[allow(clippy::needless_range_loop)]
    for f in 0..dims {
        order.sort_by(|&a, &b| xs[a][f].total_cmp(&xs[b][f]).then(a.cmp(&b)));
        let (mut s, mut sq) = (0.0, 0.0);
        for k in 0..n - 1 {
            let y = ys[order[k]];
            s += y;
            sq += y * y;
            let (lo, hi) = (xs[order[k]][f], xs[order[k + 1]][f]);
            if lo == hi {
                continue;
            }
            let (nl, nr) = ((k + 1) as f64, (n - k - 1) as f64);
            let sse = (sq - s * s / nl) + ((total_sq - sq) - (total - s).powi(2) / nr);
            if best.is_none_or(|(b, _, _)| sse < b) {
                let mid = 0.5 * (lo + hi);
                // guard against the midpoint rounding onto the upper value
                let threshold = if mid < hi { mid } else { lo };
                best = Some((sse, f, threshold));
            }
        }
    }
    best.map(|(_, f, t)| (f, t))
}

/// Bagged regression trees. Predictions report the across-tree mean and
/// variance.
#[derive(Debug, Clone)]
pub struct RfModel {
    trees: Vec<Tree>,
}

/// Fits a forest. Samples are put in a canonical order and every tree's
/// bootstrap stream is seeded from a hash of that content plus one draw from
/// `rng`, so the model does not depend on the order of `samples`.
pub fn rf_fit<R: Rng + ?Sized>(
    samples: &[ObjectiveSample],
    params: &RfParams,
    rng: &mut R,
) -> Result<RfModel> {
    if samples.is_empty() {
        return Err(Error::invalid("rf_fit needs at least one sample"));
    }
    if params.n_trees == 0 {
        return Err(Error::invalid("n_trees must be at least 1"));
    }
    let dims = samples[0].proposal.len();
    if samples
        .iter()
        .any(|s| s.proposal.len() != dims || !s.score.is_finite())
    {
        return Err(Error::invalid(
            "rf_fit samples must be finite and share one dimension",
        ));
    }
    let salt: u64 = rng.random();
    let mut sorted: Vec<&ObjectiveSample> = samples.iter().collect();
    sorted.sort_by(|a, b| {
        a.proposal
            .iter()
            .zip(&b.proposal)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.score.total_cmp(&b.score))
    });
    let xs: Vec<&[f64]> = sorted.iter().map(|s| s.proposal.as_slice()).collect();
    let ys: Vec<f64> = sorted.iter().map(|s| s.score).collect();
    let n = xs.len();

    if n < 2 {
        let tree = Tree {
            nodes: vec![Node::Leaf(ys[0])],
        };
        return Ok(RfModel { trees: vec![tree] });
    }

    let content = seed::hash_f64s(xs.iter().flat_map(|x| x.iter()).chain(ys.iter()));
    let trees = (0..params.n_trees)
        .map(|t| {
            let rows = if params.bootstrap {
                let mut tree_rng =
                    ChaCha8Rng::seed_from_u64(seed::derive(content ^ salt, t as u64));
                (0..n).map(|_| tree_rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            Tree::fit(&xs, &ys, rows)
        })
        .collect();
    Ok(RfModel { trees })
}

impl RfModel {
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        let preds: Vec<f64> = self.trees.iter().map(|t| t.predict(x)).collect();
        let m = preds.len() as f64;
        let mean = preds.iter().sum::<f64>() / m;
        let var = preds.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / m;
        (mean, var.max(0.0))
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }
}

pub fn rf_predict(model: &RfModel, x: &[f64]) -> (f64, f64) {
    model.predict(x)
}
