//! Soft-margin SVM trained by SMO with second-order working-set selection.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Rbf,
    Poly,
}

impl std::str::FromStr for KernelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(KernelKind::Linear),
            "rbf" => Ok(KernelKind::Rbf),
            "poly" | "polynomial" => Ok(KernelKind::Poly),
            other => Err(format!("unknown kernel `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub kernel: KernelKind,
    pub c: f64,
    /// `None` resolves to `1 / n_features` at training time.
    pub gamma: Option<f64>,
    pub degree: u32,
    pub coef0: f64,
    pub tol: f64,
    /// Iteration cap, in multiples of the training-set size.
    pub max_passes: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            kernel: KernelKind::Rbf,
            c: 1.0,
            gamma: None,
            degree: 3,
            coef0: 1.0,
            tol: 1e-3,
            max_passes: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub kind: KernelKind,
    pub gamma: f64,
    pub degree: u32,
    pub coef0: f64,
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.kind {
            KernelKind::Linear => super::logreg::dot(a, b),
            KernelKind::Rbf => {
                let d2: f64 = a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum();
                (-self.gamma * d2).exp()
            }
            KernelKind::Poly => {
                (self.gamma * super::logreg::dot(a, b) + self.coef0).powi(self.degree as i32)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: Kernel,
    pub support_vectors: Vec<Vec<f64>>,
    /// Training-row index of each support vector.
    pub support_indices: Vec<usize>,
    /// `alpha_i * y_i` with `y_i` in {-1, +1}.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
}

impl SvmModel {
    /// Signed margin `sum_i alpha_i y_i K(x_i, x) + b`; positive means class 1.
    pub fn decision(&self, row: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.dual_coef)
            .map(|(sv, &c)| c * self.kernel.eval(sv, row))
            .sum::<f64>()
            + self.bias
    }
}

/// Result of the dual solve, with every multiplier kept.
#[derive(Debug, Clone)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
}

const TAU: f64 = 1e-12;

pub fn resolve_kernel(params: &SvmParams, n_features: usize) -> Kernel {
    Kernel {
        kind: params.kernel,
        gamma: params.gamma.unwrap_or(1.0 / n_features.max(1) as f64),
        degree: params.degree,
        coef0: params.coef0,
    }
}

/// Minimizes `1/2 a'Qa - e'a` subject to `0 <= a <= C`, `y'a = 0`, where
/// `Q_ij = y_i y_j K(x_i, x_j)`, until the maximal KKT violation is below `tol`.
pub fn solve_dual(x: &Array2<f64>, labels: &[u8], kernel: &Kernel, c: f64, tol: f64, max_iter: usize) -> DualSolution {
    let n = x.nrows();
    let y: Vec<f64> = labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let rows: Vec<&[f64]> = x.rows().into_iter().map(|r| r.to_slice().unwrap()).collect();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(rows[i], rows[j]);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    let kk = |i: usize, j: usize| k[i * n + j];

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let upper = |a: f64| a >= c;
    let lower = |a: f64| a <= 0.0;
    let in_up = |t: usize, a: &[f64]| if y[t] > 0.0 { !upper(a[t]) } else { !lower(a[t]) };
    let in_low = |t: usize, a: &[f64]| if y[t] > 0.0 { !lower(a[t]) } else { !upper(a[t]) };

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        // i: maximal violator in I_up by -y G.
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if in_up(t, &alpha) && -y[t] * grad[t] > gmax {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        // j: second-order choice in I_low; gmin tracks the smallest -y G there.
        let mut gmin = f64::INFINITY;
        let mut j = usize::MAX;
        let mut best_obj = f64::INFINITY;
        for t in 0..n {
            if !in_low(t, &alpha) {
                continue;
            }
            let v = -y[t] * grad[t];
            gmin = gmin.min(v);
            if i == usize::MAX {
                continue;
            }
            let b = gmax - v;
            if b > 0.0 {
                let mut a = kk(i, i) + kk(t, t) - 2.0 * kk(i, t);
                if a <= 0.0 {
                    a = TAU;
                }
                let obj = -(b * b) / a;
                if obj < best_obj {
                    best_obj = obj;
                    j = t;
                }
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < tol {
            converged = true;
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let mut quad = kk(i, i) + kk(j, j) - 2.0 * kk(i, j);
        if quad <= 0.0 {
            quad = TAU;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * kk(i, t) * di + y[j] * kk(j, t) * dj);
        }
    }

    DualSolution {
        bias: bias_from_gradient(&alpha, &grad, &y, c),
        alpha,
        iterations,
        converged,
    }
}

/// `b = -rho`, with rho averaged over free multipliers, or the midpoint of
/// the feasible interval when none are free.
fn bias_from_gradient(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free_sum = 0.0;
    let mut n_free = 0usize;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            free_sum += yg;
        }
    }
    let rho = if n_free > 0 {
        free_sum / n_free as f64
    } else {
        (ub + lb) / 2.0
    };
    -rho
}

pub fn fit(x: &Array2<f64>, y: &[u8], params: &SvmParams) -> (SvmModel, SvmParams, bool) {
    let kernel = resolve_kernel(params, x.ncols());
    let max_iter = params.max_passes.saturating_mul(x.nrows().max(1));
    let sol = solve_dual(x, y, &kernel, params.c, params.tol, max_iter);
    let mut model = SvmModel {
        kernel,
        support_vectors: Vec::new(),
        support_indices: Vec::new(),
        dual_coef: Vec::new(),
        bias: sol.bias,
    };
    for (i, &a) in sol.alpha.iter().enumerate() {
        if a > 0.0 {
            model.support_vectors.push(x.row(i).to_vec());
            model.support_indices.push(i);
            model.dual_coef.push(if y[i] == 1 { a } else { -a });
        }
    }
    let resolved = SvmParams {
        gamma: Some(kernel.gamma),
        ..params.clone()
    };
    (model, resolved, sol.converged)
}
