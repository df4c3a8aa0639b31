use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::numerics::{log1p_exp, sigmoid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogRegParams {
    pub lr: f64,
    pub l2: f64,
    pub epochs: usize,
    /// Stop once the gradient's largest component is below this.
    pub tol: f64,
}

impl Default for LogRegParams {
    fn default() -> Self {
        Self {
            lr: 0.1,
            l2: 1e-3,
            epochs: 2000,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogRegModel {
    pub fn margin(&self, row: &[f64]) -> f64 {
        self.bias + dot(&self.weights, row)
    }

    /// Probability of class 1.
    pub fn score(&self, row: &[f64]) -> f64 {
        sigmoid(self.margin(row))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// Mean log-loss plus `l2/2 * |w|^2` and its gradient. `theta` holds the
/// weights followed by the bias; the bias is not penalized.
pub fn loss_and_grad(theta: &[f64], x: &Array2<f64>, y: &[u8], l2: f64) -> (f64, Vec<f64>) {
    let p = x.ncols();
    let n = x.nrows() as f64;
    let (w, b) = (&theta[..p], theta[p]);
    let x = x.as_standard_layout();
    let mut grad = vec![0.0; p + 1];
    let mut loss = 0.0;
    for (row, &label) in x.rows().into_iter().zip(y) {
        let row = row.as_slice().expect("standard layout");
        let z = b + dot(w, row);
        let t = f64::from(label);
        loss += log1p_exp(z) - t * z;
        let r = sigmoid(z) - t;
        for (g, &v) in grad[..p].iter_mut().zip(row) {
            *g += r * v;
        }
        grad[p] += r;
    }
    loss /= n;
    for g in grad.iter_mut() {
        *g /= n;
    }
    for (g, &wj) in grad[..p].iter_mut().zip(w) {
        *g += l2 * wj;
    }
    loss += 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>();
    (loss, grad)
}

/// Full-batch gradient descent from zero weights. Returns the model and
/// whether the gradient tolerance was reached before the epoch cap.
pub fn fit(x: &Array2<f64>, y: &[u8], params: &LogRegParams) -> (LogRegModel, bool) {
    let p = x.ncols();
    let mut theta = vec![0.0; p + 1];
    let mut converged = false;
    for _ in 0..params.epochs {
        let (_, grad) = loss_and_grad(&theta, x, y, params.l2);
        if grad.iter().fold(0.0f64, |m, g| m.max(g.abs())) < params.tol {
            converged = true;
            break;
        }
        for (t, g) in theta.iter_mut().zip(&grad) {
            *t -= params.lr * g;
        }
    }
    let bias = theta.pop().unwrap();
    (LogRegModel { weights: theta, bias }, converged)
}
