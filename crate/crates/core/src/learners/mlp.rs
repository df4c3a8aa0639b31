//! One-hidden-layer perceptron with a sigmoid output, trained by
//! per-sample backpropagation on the cross-entropy loss.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::numerics::{log1p_exp, sigmoid, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Logistic,
    Tanh,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Logistic => sigmoid(z),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the activation value `a`.
    fn slope(self, a: f64) -> f64 {
        match self {
            Activation::Logistic => a * (1.0 - a),
            Activation::Tanh => 1.0 - a * a,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpParams {
    pub hidden: usize,
    pub lr: f64,
    pub epochs: usize,
    pub activation: Activation,
}

impl Default for MlpParams {
    fn default() -> Self {
        Self {
            hidden: 16,
            lr: 0.05,
            epochs: 500,
            activation: Activation::Logistic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub activation: Activation,
    /// `hidden x n_features`.
    pub hidden_weights: Vec<Vec<f64>>,
    pub hidden_bias: Vec<f64>,
    pub output_weights: Vec<f64>,
    pub output_bias: f64,
}

impl MlpModel {
    fn init(n_features: usize, hidden: usize, activation: Activation, rng: &mut Rng) -> Self {
        let mut draw = || rng.uniform_in(-0.5, 0.5);
        let hidden_weights = (0..hidden).map(|_| (0..n_features).map(|_| draw()).collect()).collect();
        let hidden_bias = (0..hidden).map(|_| draw()).collect();
        let output_weights = (0..hidden).map(|_| draw()).collect();
        let output_bias = draw();
        Self {
            activation,
            hidden_weights,
            hidden_bias,
            output_weights,
            output_bias,
        }
    }

    fn hidden(&self, row: &[f64]) -> Vec<f64> {
        self.hidden_weights
            .iter()
            .zip(&self.hidden_bias)
            .map(|(w, b)| self.activation.apply(b + super::logreg::dot(w, row)))
            .collect()
    }

    pub fn logit(&self, row: &[f64]) -> f64 {
        self.output_bias + super::logreg::dot(&self.output_weights, &self.hidden(row))
    }

    /// Probability of class 1.
    pub fn score(&self, row: &[f64]) -> f64 {
        sigmoid(self.logit(row))
    }

    /// Parameters flattened as hidden weights (row-major), hidden biases,
    /// output weights, output bias.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.hidden_weights.iter().flatten().copied().collect();
        v.extend(&self.hidden_bias);
        v.extend(&self.output_weights);
        v.push(self.output_bias);
        v
    }

    pub fn from_flat(theta: &[f64], n_features: usize, hidden: usize, activation: Activation) -> Self {
        let (w1, rest) = theta.split_at(hidden * n_features);
        let (b1, rest) = rest.split_at(hidden);
        let (w2, rest) = rest.split_at(hidden);
        Self {
            activation,
            hidden_weights: w1.chunks(n_features).map(<[f64]>::to_vec).collect(),
            hidden_bias: b1.to_vec(),
            output_weights: w2.to_vec(),
            output_bias: rest[0],
        }
    }

    /// Mean cross-entropy over `rows` and its gradient in [`Self::to_flat`] order.
    pub fn loss_and_grad(&self, x: &Array2<f64>, y: &[u8], rows: &[usize]) -> (f64, Vec<f64>) {
        let p = x.ncols();
        let h = self.hidden_bias.len();
        let mut grad = vec![0.0; h * p + 2 * h + 1];
        let mut loss = 0.0;
        for &i in rows {
            let row = x.row(i);
            let row = row.as_slice().unwrap();
            let a = self.hidden(row);
            let z = self.output_bias + super::logreg::dot(&self.output_weights, &a);
            let t = f64::from(y[i]);
            loss += log1p_exp(z) - t * z;
            let dz = sigmoid(z) - t;
            for k in 0..h {
                let dh = dz * self.output_weights[k] * self.activation.slope(a[k]);
                for (g, &v) in grad[k * p..(k + 1) * p].iter_mut().zip(row) {
                    *g += dh * v;
                }
                grad[h * p + k] += dh;
                grad[h * p + h + k] += dz * a[k];
            }
            grad[h * p + 2 * h] += dz;
        }
        let n = rows.len() as f64;
        grad.iter_mut().for_each(|g| *g /= n);
        (loss / n, grad)
    }
}

/// Seeded uniform(-0.5, 0.5) initialization, then `epochs` shuffled passes of
/// single-row gradient steps. Reports `false` if the weights left the finite range.
pub fn fit(x: &Array2<f64>, y: &[u8], params: &MlpParams, seed: u64) -> (MlpModel, bool) {
    let mut rng = Rng::new(seed);
    let (n, p) = x.dim();
    let mut model = MlpModel::init(p, params.hidden, params.activation, &mut rng);
    let mut theta = model.to_flat();
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..params.epochs {
        rng.shuffle(&mut order);
        for &i in &order {
            let (_, g) = model.loss_and_grad(x, y, &[i]);
            for (t, gi) in theta.iter_mut().zip(&g) {
                *t -= params.lr * gi;
            }
            model = MlpModel::from_flat(&theta, p, params.hidden, params.activation);
        }
    }
    let finite = theta.iter().all(|v| v.is_finite());
    (model, finite)
}
