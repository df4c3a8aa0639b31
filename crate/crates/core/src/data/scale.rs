use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;

/// Per-column minimum and maximum used by the min-max map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScalerParams {
    /// Fits on the listed rows, or on every row when `rows` is `None`.
    pub fn fit(x: &Array2<f64>, rows: Option<&[usize]>) -> Self {
        let p = x.ncols();
        let mut min = vec![f64::INFINITY; p];
        let mut max = vec![f64::NEG_INFINITY; p];
        let mut visit = |row: ndarray::ArrayView1<f64>| {
            for (j, &v) in row.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        };
        match rows {
            Some(rows) => rows.iter().for_each(|&i| visit(x.row(i))),
            None => x.axis_iter(Axis(0)).for_each(visit),
        }
        Self { min, max }
    }

    pub fn n_features(&self) -> usize {
        self.min.len()
    }

    /// `(v - min) / (max - min)`; constant columns map to 0. No clamping.
    pub fn scale_value(&self, feature: usize, v: f64) -> f64 {
        let range = self.max[feature] - self.min[feature];
        if range > 0.0 {
            (v - self.min[feature]) / range
        } else {
            0.0
        }
    }

    pub fn transform(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut out = x.clone();
        for mut row in out.axis_iter_mut(Axis(0)) {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.scale_value(j, *v);
            }
        }
        out
    }
}

/// Scales every column to `[0, 1]` using statistics from `train_rows` when given.
pub fn minmax_scale(dataset: &Dataset, train_rows: Option<&[usize]>) -> (Dataset, ScalerParams) {
    let params = ScalerParams::fit(&dataset.x, train_rows);
    let scaled = Dataset {
        x: params.transform(&dataset.x),
        scaled: true,
        ..dataset.clone()
    };
    (scaled, params)
}
