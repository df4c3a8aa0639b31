//! Feature selection: recursive elimination, LASSO, chi-square scores and
//! forest importances, each producing nested sets for a list of sizes.
//!
//! Every selector reduces to a full ranking of the columns; a set of size
//! `k` is the first `k` entries of that ranking, which makes the sets of one
//! run nest by construction.

use ndarray::{Array2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::logreg::{self, LogRegParams};
use crate::learners::tree::{column_keys, fit_gini_tree};
use crate::numerics::{sigmoid, soft_threshold, stable_argsort_desc, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectorKind {
    Rfe,
    Lasso,
    #[serde(rename = "chi2")]
    ChiSquare,
    #[serde(rename = "tree")]
    TreeBased,
}

impl SelectorKind {
    /// Canonical order, matching the set-id letters R, L, C, T.
    pub const ALL: [SelectorKind; 4] = [
        SelectorKind::Rfe,
        SelectorKind::Lasso,
        SelectorKind::ChiSquare,
        SelectorKind::TreeBased,
    ];

    pub fn letter(self) -> char {
        match self {
            SelectorKind::Rfe => 'R',
            SelectorKind::Lasso => 'L',
            SelectorKind::ChiSquare => 'C',
            SelectorKind::TreeBased => 'T',
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SelectorKind::Rfe => "rfe",
            SelectorKind::Lasso => "lasso",
            SelectorKind::ChiSquare => "chi2",
            SelectorKind::TreeBased => "tree",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            SelectorKind::Rfe => "RFE",
            SelectorKind::Lasso => "LASSO",
            SelectorKind::ChiSquare => "Chi-Square",
            SelectorKind::TreeBased => "Tree-based",
        }
    }
}

impl std::fmt::Display for SelectorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SelectorKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "rfe" | "r" => SelectorKind::Rfe,
            "lasso" | "l" => SelectorKind::Lasso,
            "chi2" | "chi_square" | "chisquare" | "c" => SelectorKind::ChiSquare,
            "tree" | "tree_based" | "treebased" | "t" => SelectorKind::TreeBased,
            other => return Err(format!("unknown selector `{other}`")),
        })
    }
}

/// A selector's output. `indices` are 0-based columns in rank order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSet {
    pub set_id: String,
    pub selector: SelectorKind,
    pub k: usize,
    pub indices: Vec<usize>,
    pub feature_names: Vec<String>,
}

impl FeatureSet {
    pub fn from_ranking(
        selector: SelectorKind,
        position: usize,
        k: usize,
        ranking: &[usize],
        names: &[String],
    ) -> Result<Self> {
        if k == 0 || k > ranking.len() {
            return Err(Error::InvalidArgument(format!(
                "set size {k} outside 1..={}",
                ranking.len()
            )));
        }
        let indices = ranking[..k].to_vec();
        Ok(Self {
            set_id: format!("{position}{}", selector.letter()),
            selector,
            k,
            feature_names: indices.iter().map(|&j| names[j].clone()).collect(),
            indices,
        })
    }

    /// Column indices in ascending order, the order used to build model inputs.
    pub fn columns(&self) -> Vec<usize> {
        let mut c = self.indices.clone();
        c.sort_unstable();
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LassoLoss {
    LeastSquares,
    Logistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LassoConfig {
    pub loss: LassoLoss,
    /// Starting penalty; `None` starts at the smallest penalty that zeroes
    /// every coefficient.
    pub lambda: Option<f64>,
    pub tol: f64,
    pub max_sweeps: usize,
    pub max_halvings: usize,
}

impl Default for LassoConfig {
    fn default() -> Self {
        Self {
            loss: LassoLoss::LeastSquares,
            lambda: None,
            tol: 1e-6,
            max_sweeps: 10_000,
            max_halvings: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Features tried per split; `None` means `floor(sqrt(p))`.
    pub max_features: Option<usize>,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 200,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectorConfig {
    pub rfe: LogRegParams,
    pub lasso: LassoConfig,
    pub forest: ForestConfig,
}

fn check_xy(x: &Array2<f64>, y: &[u8]) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "{} rows but {} labels",
            x.nrows(),
            y.len()
        )));
    }
    if x.ncols() == 0 {
        return Err(Error::InvalidArgument("no feature columns".into()));
    }
    if !(y.contains(&0) && y.contains(&1)) {
        return Err(Error::SingleClass);
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("selector input".into()));
    }
    Ok(())
}

/// Chi-square statistic of each non-negative column against the class:
/// observed mass per class versus the mass expected from class frequencies.
pub fn chi_square_scores(x: &Array2<f64>, y: &[u8]) -> Result<Vec<f64>> {
    check_xy(x, y)?;
    if let Some(((i, j), v)) = x.indexed_iter().find(|(_, v)| **v < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "chi-square needs non-negative features; row {i} column {j} is {v}"
        )));
    }
    let n = y.len() as f64;
    let freq = [
        y.iter().filter(|&&c| c == 0).count() as f64 / n,
        y.iter().filter(|&&c| c == 1).count() as f64 / n,
    ];
    Ok(x.axis_iter(Axis(1))
        .map(|col| {
            let mut observed = [0.0; 2];
            for (&v, &c) in col.iter().zip(y) {
                observed[c as usize] += v;
            }
            let total = observed[0] + observed[1];
            (0..2)
                .map(|c| {
                    let expected = total * freq[c];
                    if expected == 0.0 {
                        0.0
                    } else {
                        (observed[c] - expected).powi(2) / expected
                    }
                })
                .sum()
        })
        .collect())
}

pub fn chi_square_ranking(x: &Array2<f64>, y: &[u8]) -> Result<Vec<usize>> {
    stable_argsort_desc(&chi_square_scores(x, y)?)
}

/// Result of one penalized fit.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub lambda: f64,
    pub coef: Vec<f64>,
    pub sweeps: usize,
}

impl LassoFit {
    pub fn nonzero(&self) -> usize {
        self.coef.iter().filter(|&&c| c != 0.0).count()
    }
}

struct Centered {
    x: Array2<f64>,
    y: Vec<f64>,
    /// `|x_j|^2 / n`.
    scale: Vec<f64>,
}

fn center(x: &Array2<f64>, y: &[u8]) -> Centered {
    let n = x.nrows() as f64;
    let mean = x.mean_axis(Axis(0)).expect("non-empty");
    let xc = x - &mean;
    let ybar = y.iter().map(|&v| f64::from(v)).sum::<f64>() / n;
    let yc: Vec<f64> = y.iter().map(|&v| f64::from(v) - ybar).collect();
    let scale = xc.axis_iter(Axis(1)).map(|c| c.dot(&c) / n).collect();
    Centered { x: xc, y: yc, scale }
}

/// Smallest penalty at which every coefficient is zero.
pub fn lasso_lambda_max(x: &Array2<f64>, y: &[u8]) -> f64 {
    let c = center(x, y);
    let n = x.nrows() as f64;
    c.x.axis_iter(Axis(1))
        .map(|col| col.iter().zip(&c.y).map(|(a, b)| a * b).sum::<f64>().abs() / n)
        .fold(0.0, f64::max)
}

/// Cyclic coordinate descent on `(1/2n)|y - b - Xw|^2 + lambda |w|_1` with an
/// unpenalized intercept, started from `warm` (or zero).
pub fn lasso_fit(x: &Array2<f64>, y: &[u8], lambda: f64, config: &LassoConfig, warm: Option<&[f64]>) -> Result<LassoFit> {
    let c = center(x, y);
    lasso_cd(&c, lambda, config, warm)
}

fn lasso_cd(c: &Centered, lambda: f64, config: &LassoConfig, warm: Option<&[f64]>) -> Result<LassoFit> {
    let (n, p) = c.x.dim();
    let nf = n as f64;
    let mut w = warm.map_or_else(|| vec![0.0; p], <[f64]>::to_vec);
    let mut r = c.y.clone();
    for j in 0..p {
        if w[j] != 0.0 {
            for i in 0..n {
                r[i] -= c.x[(i, j)] * w[j];
            }
        }
    }
    let mut max_delta = f64::INFINITY;
    for sweep in 1..=config.max_sweeps {
        max_delta = 0.0;
        for j in 0..p {
            if c.scale[j] == 0.0 {
                w[j] = 0.0;
                continue;
            }
            let col = c.x.column(j);
            let rho = col.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() / nf + c.scale[j] * w[j];
            let new = soft_threshold(rho, lambda) / c.scale[j];
            let delta = new - w[j];
            if delta != 0.0 {
                for (ri, &a) in r.iter_mut().zip(col.iter()) {
                    *ri -= a * delta;
                }
                w[j] = new;
            }
            max_delta = max_delta.max(delta.abs());
        }
        if max_delta < config.tol {
            return Ok(LassoFit {
                lambda,
                coef: w,
                sweeps: sweep,
            });
        }
    }
    Err(Error::LassoNonConvergence {
        sweeps: config.max_sweeps,
        lambda,
        max_delta,
        nonzero: w.iter().filter(|&&v| v != 0.0).count(),
    })
}

/// Proximal gradient on the mean log-loss plus `lambda |w|_1`; the
/// intercept is unpenalized.
fn logistic_l1(x: &Array2<f64>, y: &[u8], lambda: f64, config: &LassoConfig, warm: Option<&[f64]>) -> Result<LassoFit> {
    let (n, p) = x.dim();
    let nf = n as f64;
    // 1/L with L bounded by |[X 1]|_F^2 / (4n).
    let frob = x.iter().map(|v| v * v).sum::<f64>() + nf;
    let step = 4.0 * nf / frob;
    let mut w = warm.map_or_else(|| vec![0.0; p], <[f64]>::to_vec);
    let ybar = y.iter().map(|&v| f64::from(v)).sum::<f64>() / nf;
    let mut b = (ybar / (1.0 - ybar)).ln();
    let mut max_delta = f64::INFINITY;
    for sweep in 1..=config.max_sweeps {
        let mut grad = vec![0.0; p];
        let mut gb = 0.0;
        for (row, &t) in x.rows().into_iter().zip(y) {
            let z = b + row.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>();
            let res = sigmoid(z) - f64::from(t);
            for (g, &a) in grad.iter_mut().zip(row.iter()) {
                *g += res * a;
            }
            gb += res;
        }
        max_delta = 0.0;
        for j in 0..p {
            let new = soft_threshold(w[j] - step * grad[j] / nf, step * lambda);
            max_delta = max_delta.max((new - w[j]).abs());
            w[j] = new;
        }
        let nb = b - step * gb / nf;
        max_delta = max_delta.max((nb - b).abs());
        b = nb;
        if max_delta < config.tol {
            return Ok(LassoFit {
                lambda,
                coef: w,
                sweeps: sweep,
            });
        }
    }
    Err(Error::LassoNonConvergence {
        sweeps: config.max_sweeps,
        lambda,
        max_delta,
        nonzero: w.iter().filter(|&&v| v != 0.0).count(),
    })
}

/// Fits at the starting penalty and halves it, warm-starting each fit from
/// the previous one, until at least `k` coefficients are nonzero. Returns
/// every fit along the way.
pub fn lasso_path(x: &Array2<f64>, y: &[u8], k: usize, config: &LassoConfig) -> Result<Vec<LassoFit>> {
    check_xy(x, y)?;
    let centered = center(x, y);
    let mut lambda = config.lambda.unwrap_or_else(|| lasso_lambda_max(x, y));
    let mut path: Vec<LassoFit> = Vec::new();
    for _ in 0..=config.max_halvings {
        let warm = path.last().map(|f| f.coef.as_slice());
        let fit = match config.loss {
            LassoLoss::LeastSquares => lasso_cd(&centered, lambda, config, warm)?,
            LassoLoss::Logistic => logistic_l1(x, y, lambda, config, warm)?,
        };
        let done = fit.nonzero() >= k;
        path.push(fit);
        if done {
            break;
        }
        lambda *= 0.5;
    }
    Ok(path)
}

/// Columns by decreasing `|coefficient|` at the first penalty on the halving
/// path with at least `k` nonzero coefficients. Columns still at zero when
/// the halving budget runs out follow in index order.
pub fn lasso_ranking(x: &Array2<f64>, y: &[u8], k: usize, config: &LassoConfig) -> Result<Vec<usize>> {
    let path = lasso_path(x, y, k, config)?;
    let fit = path.last().expect("at least one fit");
    let magnitude: Vec<f64> = fit.coef.iter().map(|c| c.abs()).collect();
    stable_argsort_desc(&magnitude)
}

pub fn lasso_select(x: &Array2<f64>, y: &[u8], k: usize, names: &[String], config: &LassoConfig) -> Result<FeatureSet> {
    FeatureSet::from_ranking(SelectorKind::Lasso, 1, k, &lasso_ranking(x, y, k, config)?, names)
}

/// Backward elimination with a logistic-regression base model, one column
/// per round, stopping when `stop_at` columns survive. The ranking lists the
/// survivors by decreasing final `|weight|`, then the eliminated columns from
/// last removed to first. Among equal weights the lower column index is
/// removed first.
pub fn rfe_ranking(x: &Array2<f64>, y: &[u8], stop_at: usize, params: &LogRegParams) -> Result<Vec<usize>> {
    check_xy(x, y)?;
    let p = x.ncols();
    if stop_at == 0 || stop_at > p {
        return Err(Error::InvalidArgument(format!("set size {stop_at} outside 1..={p}")));
    }
    let fit_on = |surviving: &[usize]| -> Result<Vec<f64>> {
        let sub = x.select(Axis(1), surviving);
        let (model, _) = logreg::fit(&sub, y, params);
        if model.weights.iter().any(|w| !w.is_finite()) || !model.bias.is_finite() {
            return Err(Error::Elimination {
                features: surviving.to_vec(),
                source: Box::new(Error::NonFinite("logistic regression weights".into())),
            });
        }
        Ok(model.weights)
    };

    let mut surviving: Vec<usize> = (0..p).collect();
    let mut eliminated = Vec::with_capacity(p - stop_at);
    let mut weights = fit_on(&surviving)?;
    while surviving.len() > stop_at {
        let mut worst = 0;
        for (pos, w) in weights.iter().enumerate() {
            if w.abs() < weights[worst].abs() {
                worst = pos;
            }
        }
        eliminated.push(surviving.remove(worst));
        weights = fit_on(&surviving)?;
    }
    let magnitude: Vec<f64> = weights.iter().map(|w| w.abs()).collect();
    let mut ranking: Vec<usize> = stable_argsort_desc(&magnitude)?
        .into_iter()
        .map(|pos| surviving[pos])
        .collect();
    ranking.extend(eliminated.iter().rev());
    Ok(ranking)
}

pub fn rfe_select(x: &Array2<f64>, y: &[u8], k: usize, names: &[String], params: &LogRegParams) -> Result<FeatureSet> {
    FeatureSet::from_ranking(SelectorKind::Rfe, 1, k, &rfe_ranking(x, y, k, params)?, names)
}

/// Mean Gini importance over a bootstrap forest, normalized to sum to one.
/// Tree `t` draws from `Rng::child(seed, t)`.
pub fn forest_importances(x: &Array2<f64>, y: &[u8], config: &ForestConfig, seed: u64) -> Result<Vec<f64>> {
    check_xy(x, y)?;
    if config.n_trees == 0 {
        return Err(Error::InvalidArgument("forest needs at least one tree".into()));
    }
    let x = x.as_standard_layout().into_owned();
    let (n, p) = x.dim();
    let max_features = config
        .max_features
        .unwrap_or_else(|| (p as f64).sqrt().floor() as usize)
        .clamp(1, p);
    let keys = column_keys(&x);
    let per_tree: Vec<Vec<f64>> = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = Rng::child(seed, t as u64);
            let rows: Vec<usize> = (0..n).map(|_| rng.below(n)).collect();
            fit_gini_tree(&x, y, &rows, &keys, max_features, &mut rng).1
        })
        .collect();
    let mut total = vec![0.0; p];
    for imp in &per_tree {
        for (t, v) in total.iter_mut().zip(imp) {
            *t += v;
        }
    }
    let sum: f64 = total.iter().sum();
    if sum > 0.0 {
        total.iter_mut().for_each(|v| *v /= sum);
    }
    Ok(total)
}

pub fn tree_ranking(x: &Array2<f64>, y: &[u8], config: &ForestConfig, seed: u64) -> Result<Vec<usize>> {
    stable_argsort_desc(&forest_importances(x, y, config, seed)?)
}

pub fn tree_importance_select(
    x: &Array2<f64>,
    y: &[u8],
    k: usize,
    names: &[String],
    config: &ForestConfig,
    seed: u64,
) -> Result<FeatureSet> {
    FeatureSet::from_ranking(SelectorKind::TreeBased, 1, k, &tree_ranking(x, y, config, seed)?, names)
}

pub fn chi_square_select(x: &Array2<f64>, y: &[u8], k: usize, names: &[String]) -> Result<FeatureSet> {
    FeatureSet::from_ranking(SelectorKind::ChiSquare, 1, k, &chi_square_ranking(x, y)?, names)
}

/// Full ranking from one selector, good for every set size up to `k_max`.
/// RFE stops eliminating at `k_min`; LASSO runs its path until `k_max`
/// coefficients are nonzero.
pub fn rank_features(
    kind: SelectorKind,
    x: &Array2<f64>,
    y: &[u8],
    k_min: usize,
    k_max: usize,
    config: &SelectorConfig,
    seed: u64,
) -> Result<Vec<usize>> {
    match kind {
        SelectorKind::Rfe => rfe_ranking(x, y, k_min, &config.rfe),
        SelectorKind::Lasso => lasso_ranking(x, y, k_max, &config.lasso),
        SelectorKind::ChiSquare => chi_square_ranking(x, y),
        SelectorKind::TreeBased => tree_ranking(x, y, &config.forest, seed),
    }
}

/// One set per (selector, size), selectors in the given order and sizes
/// ascending. Set ids are the 1-based size position followed by the
/// selector letter, so sizes 10/15/20/25 give 1R..4R and so on.
pub fn build_all_feature_sets(
    x: &Array2<f64>,
    y: &[u8],
    names: &[String],
    sizes: &[usize],
    selectors: &[SelectorKind],
    config: &SelectorConfig,
    seed: u64,
) -> Result<Vec<FeatureSet>> {
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    let (Some(&k_min), Some(&k_max)) = (sizes.first(), sizes.last()) else {
        return Err(Error::InvalidArgument("no set sizes".into()));
    };
    if k_min == 0 || k_max > x.ncols() {
        return Err(Error::InvalidArgument(format!(
            "set sizes must lie in 1..={}",
            x.ncols()
        )));
    }
    let rankings: Vec<Result<Vec<usize>>> = selectors
        .par_iter()
        .map(|&kind| rank_features(kind, x, y, k_min, k_max, config, seed))
        .collect();
    let mut sets = Vec::with_capacity(selectors.len() * sizes.len());
    for (&kind, ranking) in selectors.iter().zip(rankings) {
        let ranking = ranking?;
        for (pos, &k) in sizes.iter().enumerate() {
            sets.push(FeatureSet::from_ranking(kind, pos + 1, k, &ranking, names)?);
        }
    }
    Ok(sets)
}

/// Reference memberships of the sixteen sets on the 56-feature schema, as
/// 1-based feature ids.
pub const REFERENCE_SETS: [(&str, &[usize]); 16] = [
    ("1R", &[3, 5, 6, 13, 18, 19, 22, 24, 25, 32]),
    ("2R", &[3, 5, 6, 13, 18, 19, 20, 22, 24, 25, 31, 32, 33, 51, 54]),
    ("3R", &[2, 3, 5, 6, 13, 18, 19, 20, 22, 23, 24, 25, 31, 32, 33, 35, 38, 41, 51, 54]),
    ("4R", &[2, 3, 5, 6, 7, 10, 13, 17, 18, 19, 20, 22, 23, 24, 25, 28, 30, 31, 32, 33, 35, 38, 41, 51, 54]),
    ("1L", &[1, 3, 6, 7, 18, 22, 29, 32, 51, 52]),
    ("2L", &[1, 3, 6, 7, 18, 19, 22, 25, 27, 29, 32, 38, 49, 51, 52]),
    ("3L", &[1, 3, 6, 7, 18, 19, 22, 25, 27, 28, 29, 31, 32, 33, 38, 43, 44, 49, 51, 52]),
    ("4L", &[1, 3, 6, 7, 10, 18, 19, 20, 22, 25, 27, 28, 29, 30, 31, 32, 33, 35, 38, 43, 44, 48, 49, 51, 52]),
    ("1C", &[3, 6, 18, 19, 22, 25, 30, 32, 33, 51]),
    ("2C", &[1, 3, 6, 11, 18, 19, 22, 23, 25, 30, 31, 32, 33, 35, 51]),
    ("3C", &[1, 3, 6, 10, 11, 18, 19, 20, 22, 23, 25, 27, 28, 30, 31, 32, 33, 35, 49, 51]),
    ("4C", &[1, 3, 5, 6, 10, 11, 16, 18, 19, 20, 22, 23, 25, 26, 27, 28, 30, 31, 32, 33, 35, 44, 49, 51, 52]),
    ("1T", &[1, 8, 18, 19, 27, 43, 44, 49, 51, 52]),
    ("2T", &[1, 8, 18, 19, 27, 37, 38, 40, 43, 44, 46, 48, 49, 51, 52]),
    ("3T", &[1, 8, 18, 19, 27, 37, 38, 40, 42, 43, 44, 45, 46, 47, 48, 49, 51, 52, 53, 55]),
    ("4T", &[1, 6, 8, 18, 19, 27, 29, 37, 38, 40, 41, 42, 43, 44, 45, 46, 47, 48, 49, 50, 51, 52, 53, 55, 56]),
];

pub fn reference_set(set_id: &str) -> Option<&'static [usize]> {
    REFERENCE_SETS.iter().find(|(id, _)| *id == set_id).map(|(_, s)| *s)
}

/// Number of columns of `set` (0-based) among the 1-based `reference` ids.
pub fn overlap(set: &FeatureSet, reference: &[usize]) -> usize {
    set.indices.iter().filter(|&&j| reference.contains(&(j + 1))).count()
}
