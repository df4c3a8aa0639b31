//! Independent reference computations shared by the integration suites.
#![allow(dead_code)]

use icardo::data::{encode_labels, read_csv, Dataset, LoadOptions, SchemaKind};
use icardo::learners::Kernel;
use icardo::numerics::Rng;
use icardo::synthetic::synthetic_csv;
use ndarray::Array2;

pub fn synthetic_dataset(kind: SchemaKind, n_rows: usize, n_positive: usize, seed: u64) -> Dataset {
    let text = synthetic_csv(kind, n_rows, n_positive, seed);
    let raw = read_csv(text.as_bytes(), kind, LoadOptions::default(), "synthetic").unwrap();
    encode_labels(&raw).unwrap()
}

/// Random matrix with both classes present. Values are drawn from a small
/// integer grid when `integer` is set, which produces ties.
pub fn random_xy(rng: &mut Rng, n: usize, p: usize, integer: bool) -> (Array2<f64>, Vec<u8>) {
    let x = Array2::from_shape_fn((n, p), |_| {
        if integer {
            rng.below(5) as f64
        } else {
            rng.uniform_in(0.0, 10.0)
        }
    });
    let mut y: Vec<u8> = (0..n).map(|_| u8::from(rng.uniform() < 0.5)).collect();
    y[0] = 0;
    y[n - 1] = 1;
    (x, y)
}

/// Chi-square by building the class-by-feature contingency table and the
/// table expected under independence, then summing cell by cell.
pub fn chi_square_oracle(x: &Array2<f64>, y: &[u8]) -> Vec<f64> {
    let (n, p) = x.dim();
    let mut observed = vec![vec![0.0; p]; 2];
    let mut class_count = [0usize; 2];
    for i in 0..n {
        class_count[y[i] as usize] += 1;
        for j in 0..p {
            observed[y[i] as usize][j] += x[(i, j)];
        }
    }
    let mut scores = vec![0.0; p];
    for j in 0..p {
        let feature_total = observed[0][j] + observed[1][j];
        for c in 0..2 {
            let expected = feature_total * class_count[c] as f64 / n as f64;
            if expected > 0.0 {
                let d = observed[c][j] - expected;
                scores[j] += d * d / expected;
            }
        }
    }
    scores
}

/// `(tp, fp, fn, tn)` by walking the pairs once.
pub fn count_confusion(y_true: &[u8], y_pred: &[u8], positive: u8) -> (usize, usize, usize, usize) {
    let mut c = (0, 0, 0, 0);
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t == positive, p == positive) {
            (true, true) => c.0 += 1,
            (false, true) => c.1 += 1,
            (true, false) => c.2 += 1,
            (false, false) => c.3 += 1,
        }
    }
    c
}

/// `n x p` design whose columns are Walsh functions: entries +-1, each column
/// sums to zero and distinct columns are orthogonal, so `X'X / n = I`.
pub fn walsh_design(n: usize, p: usize) -> Array2<f64> {
    assert!(n.is_power_of_two() && p < n);
    Array2::from_shape_fn((n, p), |(i, j)| {
        if (i & (j + 1)).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    })
}

pub fn soft(z: f64, lambda: f64) -> f64 {
    if z > lambda {
        z - lambda
    } else if z < -lambda {
        z + lambda
    } else {
        0.0
    }
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r][col].abs().partial_cmp(&a[s][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Dual optimum when every multiplier is free: the KKT conditions reduce to
/// `Q a + y b = 1`, `y'a = 0`. Returns `(alpha, bias)`.
pub fn free_dual(x: &Array2<f64>, labels: &[u8], kernel: &Kernel) -> (Vec<f64>, f64) {
    let n = x.nrows();
    let y: Vec<f64> = labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let row = |i: usize| x.row(i).to_vec();
    let mut a = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = y[i] * y[j] * kernel.eval(&row(i), &row(j));
        }
        a[i][n] = y[i];
        a[n][i] = y[i];
    }
    let mut rhs = vec![1.0; n + 1];
    rhs[n] = 0.0;
    let sol = solve_linear(a, rhs);
    (sol[..n].to_vec(), sol[n])
}

/// Largest violation of the box-constrained KKT conditions.
pub fn kkt_violation(x: &Array2<f64>, labels: &[u8], kernel: &Kernel, alpha: &[f64], bias: f64, c: f64) -> f64 {
    let n = x.nrows();
    let y: Vec<f64> = labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let f: f64 = (0..n)
            .map(|j| alpha[j] * y[j] * kernel.eval(&x.row(j).to_vec(), &x.row(i).to_vec()))
            .sum::<f64>()
            + bias;
        let m = y[i] * f;
        let v = if alpha[i] <= 1e-8 {
            (1.0 - m).max(0.0)
        } else if alpha[i] >= c - 1e-8 {
            (m - 1.0).max(0.0)
        } else {
            (m - 1.0).abs()
        };
        worst = worst.max(v);
    }
    worst
}

/// Central differences of `f` at `theta`.
pub fn central_diff(f: impl Fn(&[f64]) -> f64, theta: &[f64], h: f64) -> Vec<f64> {
    let mut t = theta.to_vec();
    (0..theta.len())
        .map(|i| {
            t[i] = theta[i] + h;
            let up = f(&t);
            t[i] = theta[i] - h;
            let down = f(&t);
            t[i] = theta[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

pub fn max_rel_err(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v).abs() / u.abs().max(v.abs()).max(1e-8))
        .fold(0.0, f64::max)
}

pub fn xor() -> (Array2<f64>, Vec<u8>) {
    let x = Array2::from_shape_vec((4, 2), vec![0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0]).unwrap();
    (x, vec![0, 0, 1, 1])
}

/// The four-point set used by the gradient checks.
pub fn toy4() -> (Array2<f64>, Vec<u8>) {
    let x = Array2::from_shape_vec((4, 2), vec![0.1, 0.9, 0.4, 0.3, 0.8, 0.6, 0.7, 0.2]).unwrap();
    (x, vec![0, 1, 1, 0])
}
