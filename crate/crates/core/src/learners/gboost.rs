//! Gradient boosting of shallow regression trees on the logistic loss.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::tree::{fit_regression_tree, RegressionTreeConfig, Tree};
use crate::numerics::{log1p_exp, sigmoid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GradBoostParams {
    pub n_rounds: usize,
    pub depth: usize,
    pub shrinkage: f64,
    pub min_leaf: usize,
    /// Newton leaf values `sum(g) / sum(p(1-p))` instead of the mean residual.
    pub newton: bool,
}

impl Default for GradBoostParams {
    fn default() -> Self {
        Self {
            n_rounds: 200,
            depth: 3,
            shrinkage: 0.1,
            min_leaf: 2,
            newton: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradBoostModel {
    /// Initial log-odds.
    pub base_score: f64,
    pub shrinkage: f64,
    pub trees: Vec<Tree>,
}

impl GradBoostModel {
    pub fn raw_score(&self, row: &[f64]) -> f64 {
        self.base_score + self.shrinkage * self.trees.iter().map(|t| t.evaluate(row)).sum::<f64>()
    }

    /// Probability of class 1.
    pub fn score(&self, row: &[f64]) -> f64 {
        sigmoid(self.raw_score(row))
    }
}

/// Mean logistic loss of raw scores `f` against `y`.
pub fn log_loss(f: &[f64], y: &[u8]) -> f64 {
    f.iter()
        .zip(y)
        .map(|(&z, &t)| log1p_exp(z) - f64::from(t) * z)
        .sum::<f64>()
        / f.len() as f64
}

pub fn fit(x: &Array2<f64>, y: &[u8], params: &GradBoostParams) -> GradBoostModel {
    let n = x.nrows();
    let p = y.iter().map(|&t| f64::from(t)).sum::<f64>() / n as f64;
    let base_score = (p / (1.0 - p)).ln();
    let mut f = vec![base_score; n];
    let config = RegressionTreeConfig {
        max_depth: params.depth,
        min_leaf: params.min_leaf,
    };
    let mut trees = Vec::with_capacity(params.n_rounds);
    for _ in 0..params.n_rounds {
        let prob: Vec<f64> = f.iter().map(|&z| sigmoid(z)).collect();
        let residual: Vec<f64> = y.iter().zip(&prob).map(|(&t, &q)| f64::from(t) - q).collect();
        let tree = fit_regression_tree(x, &residual, &config, |rows| {
            let g: f64 = rows.iter().map(|&i| residual[i]).sum();
            if params.newton {
                let h: f64 = rows.iter().map(|&i| prob[i] * (1.0 - prob[i])).sum();
                g / h.max(1e-12)
            } else {
                g / rows.len() as f64
            }
        });
        for (i, fi) in f.iter_mut().enumerate() {
            *fi += params.shrinkage * tree.evaluate(x.row(i).as_slice().unwrap());
        }
        trees.push(tree);
    }
    GradBoostModel {
        base_score,
        shrinkage: params.shrinkage,
        trees,
    }
}
