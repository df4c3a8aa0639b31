use ndarray::Array2;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NbVariant {
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NaiveBayesParams {
    pub variant: NbVariant,
    /// Added to every variance, scaled by the largest feature variance.
    pub var_floor: f64,
}

impl Default for NaiveBayesParams {
    fn default() -> Self {
        Self {
            variant: NbVariant::Gaussian,
            var_floor: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    /// Indexed by class.
    pub log_prior: [f64; 2],
    pub mean: [Vec<f64>; 2],
    pub var: [Vec<f64>; 2],
}

impl NaiveBayesModel {
    pub fn fit(x: &Array2<f64>, y: &[u8], params: &NaiveBayesParams) -> Self {
        let p = x.ncols();
        let n = x.nrows() as f64;
        let overall_max_var = (0..p)
            .map(|j| {
                let col = x.column(j);
                let m = col.sum() / n;
                col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n
            })
            .fold(0.0f64, f64::max);
        let eps = if overall_max_var > 0.0 {
            params.var_floor * overall_max_var
        } else {
            params.var_floor
        };

        let mut log_prior = [0.0; 2];
        let mut mean = [vec![0.0; p], vec![0.0; p]];
        let mut var = [vec![0.0; p], vec![0.0; p]];
        for c in 0..2u8 {
            let rows: Vec<usize> = (0..y.len()).filter(|&i| y[i] == c).collect();
            let nc = rows.len() as f64;
            log_prior[c as usize] = (nc / n).ln();
            for j in 0..p {
                let m = rows.iter().map(|&i| x[(i, j)]).sum::<f64>() / nc;
                let v = rows.iter().map(|&i| (x[(i, j)] - m).powi(2)).sum::<f64>() / nc;
                mean[c as usize][j] = m;
                var[c as usize][j] = v + eps;
            }
        }
        Self { log_prior, mean, var }
    }

    /// Unnormalized log posterior of class `c`.
    pub fn joint_log_likelihood(&self, row: &[f64], c: usize) -> f64 {
        let ll: f64 = row
            .iter()
            .zip(&self.mean[c])
            .zip(&self.var[c])
            .map(|((&v, &m), &s2)| -0.5 * ((2.0 * std::f64::consts::PI * s2).ln() + (v - m).powi(2) / s2))
            .sum();
        self.log_prior[c] + ll
    }

    /// Log posterior odds of class 1 over class 0.
    pub fn score(&self, row: &[f64]) -> f64 {
        self.joint_log_likelihood(row, 1) - self.joint_log_likelihood(row, 0)
    }
}
