use ndarray::Array2;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Manhattan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnParams {
    pub k: usize,
    pub metric: Metric,
}

impl Default for KnnParams {
    fn default() -> Self {
        Self {
            k: 5,
            metric: Metric::Euclidean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub metric: Metric,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<u8>,
}

impl KnnModel {
    pub fn fit(x: &Array2<f64>, y: &[u8], params: &KnnParams) -> Self {
        Self {
            k: params.k,
            metric: params.metric,
            x: x.rows().into_iter().map(|r| r.to_vec()).collect(),
            y: y.to_vec(),
        }
    }

    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.metric {
            Metric::Euclidean => a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt(),
            Metric::Manhattan => a.iter().zip(b).map(|(u, v)| (u - v).abs()).sum(),
        }
    }

    /// Fraction of the `k` nearest training rows labelled 1. Equal distances
    /// favour the lower training-row index.
    pub fn score(&self, row: &[f64]) -> f64 {
        let mut d: Vec<(f64, usize)> = self
            .x
            .iter()
            .enumerate()
            .map(|(i, r)| (self.distance(r, row), i))
            .collect();
        let k = self.k.min(d.len()).max(1);
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1));
        if k < d.len() {
            d.select_nth_unstable_by(k - 1, cmp);
        }
        let pos = d[..k].iter().filter(|&&(_, i)| self.y[i] == 1).count();
        pos as f64 / k as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn k1_memorizes_training_rows() {
        let x = array![[0.1, 0.2], [0.9, 0.4], [0.3, 0.8], [0.5, 0.5]];
        let y = [0, 1, 1, 0];
        let m = KnnModel::fit(&x, &y, &KnnParams { k: 1, ..Default::default() });
        for (r, &t) in x.rows().into_iter().zip(&y) {
            assert_eq!(m.score(r.as_slice().unwrap()), f64::from(t));
        }
    }

    #[test]
    fn distance_tie_prefers_lower_index() {
        let x = array![[1.0], [-1.0]];
        let m = KnnModel::fit(&x, &[1, 0], &KnnParams { k: 1, ..Default::default() });
        assert_eq!(m.score(&[0.0]), 1.0);
    }
}
