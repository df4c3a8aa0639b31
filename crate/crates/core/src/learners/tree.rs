//! CART building blocks: least-squares regression trees for gradient
//! boosting and Gini classification trees for the importance forest.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::numerics::{mix_seed, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Binary tree stored as a node arena; node 0 is the root. Rows with
/// `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn evaluate(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Rows of `idx` sorted by feature `j`, with the midpoints between
/// consecutive distinct values as candidate thresholds.
fn sorted_by(x: &Array2<f64>, idx: &[usize], j: usize) -> Vec<usize> {
    let mut order = idx.to_vec();
    order.sort_by(|&a, &b| x[(a, j)].partial_cmp(&x[(b, j)]).unwrap().then(a.cmp(&b)));
    order
}

pub struct RegressionTreeConfig {
    pub max_depth: usize,
    pub min_leaf: usize,
}

/// Fits a least-squares tree to `targets`; leaf values come from `leaf_value`
/// applied to the rows that reach the leaf.
pub fn fit_regression_tree<F>(
    x: &Array2<f64>,
    targets: &[f64],
    config: &RegressionTreeConfig,
    leaf_value: F,
) -> Tree
where
    F: Fn(&[usize]) -> f64,
{
    let mut nodes = Vec::new();
    let rows: Vec<usize> = (0..x.nrows()).collect();
    grow_regression(x, targets, config, &leaf_value, &rows, 0, &mut nodes);
    Tree { nodes }
}

fn grow_regression<F>(
    x: &Array2<f64>,
    t: &[f64],
    config: &RegressionTreeConfig,
    leaf_value: &F,
    rows: &[usize],
    depth: usize,
    nodes: &mut Vec<Node>,
) -> usize
where
    F: Fn(&[usize]) -> f64,
{
    let at = nodes.len();
    nodes.push(Node::Leaf {
        value: leaf_value(rows),
    });
    if depth >= config.max_depth || rows.len() < 2 * config.min_leaf.max(1) {
        return at;
    }

    let n = rows.len() as f64;
    let total: f64 = rows.iter().map(|&i| t[i]).sum();
    let base = total * total / n;
    let mut best: Option<(f64, usize, f64)> = None;
    for j in 0..x.ncols() {
        let order = sorted_by(x, rows, j);
        let mut left_sum = 0.0;
        for pos in 0..order.len() - 1 {
            left_sum += t[order[pos]];
            let n_left = pos + 1;
            let n_right = order.len() - n_left;
            let (a, b) = (x[(order[pos], j)], x[(order[pos + 1], j)]);
            if a == b || n_left < config.min_leaf || n_right < config.min_leaf {
                continue;
            }
            let right_sum = total - left_sum;
            // SSE reduction = sum_l^2/n_l + sum_r^2/n_r - sum^2/n
            let gain = left_sum * left_sum / n_left as f64 + right_sum * right_sum / n_right as f64 - base;
            if gain > 1e-12 && best.map_or(true, |(g, _, _)| gain > g) {
                best = Some((gain, j, 0.5 * (a + b)));
            }
        }
    }

    if let Some((_, feature, threshold)) = best {
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[(i, feature)] <= threshold);
        let left = grow_regression(x, t, config, leaf_value, &l, depth + 1, nodes);
        let right = grow_regression(x, t, config, leaf_value, &r, depth + 1, nodes);
        nodes[at] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
    }
    at
}

/// Gini classification tree grown to purity on a (bootstrap) row multiset,
/// considering `max_features` random features per node. Returns the tree
/// (leaf value = fraction of class 1) and the per-feature impurity decrease
/// weighted by the fraction of rows reaching each split.
///
/// Features are drawn per node by ranking `mix_seed(node_seed, column_keys[j])`,
/// so the draw follows the column contents rather than column positions and
/// reordering the columns reorders the result without changing it.
pub fn fit_gini_tree(
    x: &Array2<f64>,
    y: &[u8],
    rows: &[usize],
    column_keys: &[u64],
    max_features: usize,
    rng: &mut Rng,
) -> (Tree, Vec<f64>) {
    let mut nodes = Vec::new();
    let mut importance = vec![0.0; x.ncols()];
    let total = rows.len() as f64;
    let ctx = GiniCtx {
        x,
        y,
        column_keys,
        max_features: max_features.max(1),
        total,
    };
    grow_gini(&ctx, rows, rng, &mut nodes, &mut importance);
    (Tree { nodes }, importance)
}

/// Order-independent fingerprint of each column of `x`.
pub fn column_keys(x: &Array2<f64>) -> Vec<u64> {
    x.columns()
        .into_iter()
        .map(|c| c.iter().fold(0x5EED, |acc, v| mix_seed(acc, v.to_bits())))
        .collect()
}

struct GiniCtx<'a> {
    x: &'a Array2<f64>,
    y: &'a [u8],
    column_keys: &'a [u64],
    max_features: usize,
    total: f64,
}

fn gini(pos: f64, n: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    let p = pos / n;
    2.0 * p * (1.0 - p)
}

fn grow_gini(ctx: &GiniCtx<'_>, rows: &[usize], rng: &mut Rng, nodes: &mut Vec<Node>, importance: &mut [f64]) -> usize {
    let (x, y) = (ctx.x, ctx.y);
    let n = rows.len() as f64;
    let pos = rows.iter().filter(|&&i| y[i] == 1).count() as f64;
    let at = nodes.len();
    nodes.push(Node::Leaf { value: pos / n });
    let impurity = gini(pos, n);
    if rows.len() < 2 || impurity == 0.0 {
        return at;
    }

    let node_seed = rng.next_u64();
    let mut features: Vec<(u64, usize)> = ctx
        .column_keys
        .iter()
        .enumerate()
        .map(|(j, &k)| (mix_seed(node_seed, k), j))
        .collect();
    features.sort_unstable();
    features.truncate(ctx.max_features);

    // Equal decreases go to the feature drawn first.
    let mut best: Option<(f64, usize, f64)> = None;
    for &(_, j) in &features {
        let order = sorted_by(x, rows, j);
        let mut left_pos = 0.0;
        for k in 0..order.len() - 1 {
            left_pos += f64::from(y[order[k]]);
            let (a, b) = (x[(order[k], j)], x[(order[k + 1], j)]);
            if a == b {
                continue;
            }
            let n_left = (k + 1) as f64;
            let n_right = n - n_left;
            let child = (n_left * gini(left_pos, n_left) + n_right * gini(pos - left_pos, n_right)) / n;
            let decrease = impurity - child;
            if decrease > 1e-15 && best.map_or(true, |(d, _, _)| decrease > d) {
                best = Some((decrease, j, 0.5 * (a + b)));
            }
        }
    }

    if let Some((decrease, feature, threshold)) = best {
        importance[feature] += n / ctx.total * decrease;
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[(i, feature)] <= threshold);
        let left = grow_gini(ctx, &l, rng, nodes, importance);
        let right = grow_gini(ctx, &r, rng, nodes, importance);
        nodes[at] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
    }
    at
}
