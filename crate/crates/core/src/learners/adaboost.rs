//! Two-class SAMME boosting over decision stumps.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaBoostParams {
    pub n_stumps: usize,
}

impl Default for AdaBoostParams {
    fn default() -> Self {
        Self { n_stumps: 100 }
    }
}

/// Predicts `polarity` when `x[feature] > threshold`, else `-polarity`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub polarity: i8,
    pub weight: f64,
    /// Weighted training error when the stump was accepted.
    pub error: f64,
}

impl Stump {
    pub fn vote(&self, row: &[f64]) -> f64 {
        let p = f64::from(self.polarity);
        if row[self.feature] > self.threshold {
            p
        } else {
            -p
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostModel {
    pub stumps: Vec<Stump>,
    /// Majority training label, used when no stump was accepted.
    pub fallback_label: u8,
}

impl AdaBoostModel {
    /// Weighted vote `sum_t weight_t * h_t(x)`; positive means class 1.
    pub fn score(&self, row: &[f64]) -> f64 {
        if self.stumps.is_empty() {
            return if self.fallback_label == 1 { 1.0 } else { -1.0 };
        }
        self.stumps.iter().map(|s| s.weight * s.vote(row)).sum()
    }
}

/// Error floor for a perfect stump, keeping its weight finite.
const MIN_ERROR: f64 = 1e-10;

pub fn fit(x: &Array2<f64>, y: &[u8], params: &AdaBoostParams) -> AdaBoostModel {
    let n = x.nrows();
    let signs: Vec<f64> = y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let pos = y.iter().filter(|&&l| l == 1).count();
    let fallback_label = u8::from(pos * 2 > n);

    let sorted: Vec<Vec<usize>> = (0..x.ncols())
        .map(|j| {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| x[(a, j)].partial_cmp(&x[(b, j)]).unwrap().then(a.cmp(&b)));
            order
        })
        .collect();

    let mut w = vec![1.0 / n as f64; n];
    let mut stumps = Vec::new();
    for _ in 0..params.n_stumps {
        let Some(mut stump) = best_stump(x, &signs, &w, &sorted) else {
            break;
        };
        if stump.error >= 0.5 {
            break;
        }
        let perfect = stump.error <= MIN_ERROR;
        let err = stump.error.max(MIN_ERROR);
        stump.weight = ((1.0 - err) / err).ln();

        let mut total = 0.0;
        for i in 0..n {
            let row = x.row(i);
            if stump.vote(row.as_slice().unwrap()) != signs[i] {
                w[i] *= stump.weight.exp();
            }
            total += w[i];
        }
        w.iter_mut().for_each(|v| *v /= total);
        stumps.push(stump);
        if perfect {
            break;
        }
    }
    AdaBoostModel {
        stumps,
        fallback_label,
    }
}

/// Lowest weighted-error stump; ties keep the earliest feature, threshold
/// and polarity +1.
fn best_stump(x: &Array2<f64>, signs: &[f64], w: &[f64], sorted: &[Vec<usize>]) -> Option<Stump> {
    let total: f64 = w.iter().sum();
    let mut best: Option<Stump> = None;
    for (j, order) in sorted.iter().enumerate() {
        // Threshold below every value: polarity +1 predicts +1 everywhere.
        let mut err_pos: f64 = order.iter().filter(|&&i| signs[i] < 0.0).map(|&i| w[i]).sum();
        for k in 0..order.len() - 1 {
            let i = order[k];
            // Row i moves to the `<= threshold` side and is now predicted -1.
            err_pos += if signs[i] > 0.0 { w[i] } else { -w[i] };
            let (a, b) = (x[(i, j)], x[(order[k + 1], j)]);
            if a == b {
                continue;
            }
            let threshold = 0.5 * (a + b);
            for (polarity, err) in [(1i8, err_pos), (-1i8, total - err_pos)] {
                let err = err.max(0.0) / total;
                if best.as_ref().map_or(true, |s| err < s.error) {
                    best = Some(Stump {
                        feature: j,
                        threshold,
                        polarity,
                        weight: 0.0,
                        error: err,
                    });
                }
            }
        }
    }
    best
}
