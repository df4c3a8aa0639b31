//! The seven classifiers behind a single train / predict contract.
//!
//! Inputs are min-max scaled matrices already restricted to a feature set;
//! labels are 0/1 with 1 = CAD. Every model yields a score per row that is
//! monotone in the predicted label, and equal scores at the decision
//! threshold resolve to class 0.

pub mod adaboost;
pub mod gboost;
pub mod knn;
pub mod logreg;
pub mod mlp;
pub mod naive_bayes;
pub mod svm;
pub mod tree;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{finite_diff_grad, Rng};

pub use adaboost::{AdaBoostModel, AdaBoostParams};
pub use gboost::{GradBoostModel, GradBoostParams};
pub use knn::{KnnModel, KnnParams, Metric};
pub use logreg::{LogRegModel, LogRegParams};
pub use mlp::{Activation, MlpModel, MlpParams};
pub use naive_bayes::{NaiveBayesModel, NaiveBayesParams, NbVariant};
pub use svm::{Kernel, KernelKind, SvmModel, SvmParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Svm,
    #[serde(rename = "gradboost")]
    GradBoost,
    #[serde(rename = "adaboost")]
    AdaBoost,
    #[serde(rename = "logreg")]
    LogReg,
    Knn,
    NaiveBayes,
    Mlp,
}

impl ClassifierKind {
    /// Canonical report order.
    pub const ALL: [ClassifierKind; 7] = [
        ClassifierKind::Svm,
        ClassifierKind::GradBoost,
        ClassifierKind::AdaBoost,
        ClassifierKind::LogReg,
        ClassifierKind::Knn,
        ClassifierKind::NaiveBayes,
        ClassifierKind::Mlp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Svm => "svm",
            ClassifierKind::GradBoost => "gradboost",
            ClassifierKind::AdaBoost => "adaboost",
            ClassifierKind::LogReg => "logreg",
            ClassifierKind::Knn => "knn",
            ClassifierKind::NaiveBayes => "naive_bayes",
            ClassifierKind::Mlp => "mlp",
        }
    }

    /// Heading used in tables and charts.
    pub fn display_name(self) -> &'static str {
        match self {
            ClassifierKind::Svm => "SVM",
            ClassifierKind::GradBoost => "GradBoost",
            ClassifierKind::AdaBoost => "AdaBoost",
            ClassifierKind::LogReg => "Log. Reg.",
            ClassifierKind::Knn => "KNN",
            ClassifierKind::NaiveBayes => "Naive Bayes",
            ClassifierKind::Mlp => "MLP",
        }
    }
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ClassifierKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.to_ascii_lowercase().replace('-', "_");
        Ok(match s.as_str() {
            "svm" => ClassifierKind::Svm,
            "gradboost" | "xgboost" | "gbdt" => ClassifierKind::GradBoost,
            "adaboost" => ClassifierKind::AdaBoost,
            "logreg" | "lr" => ClassifierKind::LogReg,
            "knn" => ClassifierKind::Knn,
            "naive_bayes" | "nb" => ClassifierKind::NaiveBayes,
            "mlp" | "ann" => ClassifierKind::Mlp,
            other => return Err(format!("unknown classifier `{other}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Hyperparams {
    Svm(SvmParams),
    #[serde(rename = "gradboost")]
    GradBoost(GradBoostParams),
    #[serde(rename = "adaboost")]
    AdaBoost(AdaBoostParams),
    #[serde(rename = "logreg")]
    LogReg(LogRegParams),
    Knn(KnnParams),
    NaiveBayes(NaiveBayesParams),
    Mlp(MlpParams),
}

impl Hyperparams {
    pub fn default_for(kind: ClassifierKind) -> Self {
        match kind {
            ClassifierKind::Svm => Hyperparams::Svm(Default::default()),
            ClassifierKind::GradBoost => Hyperparams::GradBoost(Default::default()),
            ClassifierKind::AdaBoost => Hyperparams::AdaBoost(Default::default()),
            ClassifierKind::LogReg => Hyperparams::LogReg(Default::default()),
            ClassifierKind::Knn => Hyperparams::Knn(Default::default()),
            ClassifierKind::NaiveBayes => Hyperparams::NaiveBayes(Default::default()),
            ClassifierKind::Mlp => Hyperparams::Mlp(Default::default()),
        }
    }

    pub fn kind(&self) -> ClassifierKind {
        match self {
            Hyperparams::Svm(_) => ClassifierKind::Svm,
            Hyperparams::GradBoost(_) => ClassifierKind::GradBoost,
            Hyperparams::AdaBoost(_) => ClassifierKind::AdaBoost,
            Hyperparams::LogReg(_) => ClassifierKind::LogReg,
            Hyperparams::Knn(_) => ClassifierKind::Knn,
            Hyperparams::NaiveBayes(_) => ClassifierKind::NaiveBayes,
            Hyperparams::Mlp(_) => ClassifierKind::Mlp,
        }
    }

    /// Rejects non-positive numeric settings.
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("{}: {what} must be positive", self.kind())));
        match self {
            Hyperparams::Svm(p) => {
                if !(p.c > 0.0) || !(p.tol > 0.0) || p.max_passes == 0 || p.degree == 0 {
                    return bad("C, tol, max_passes and degree");
                }
                if p.gamma.is_some_and(|g| !(g > 0.0)) {
                    return bad("gamma");
                }
            }
            Hyperparams::GradBoost(p) => {
                if p.n_rounds == 0 || p.depth == 0 || !(p.shrinkage > 0.0) || p.min_leaf == 0 {
                    return bad("n_rounds, depth, shrinkage and min_leaf");
                }
            }
            Hyperparams::AdaBoost(p) => {
                if p.n_stumps == 0 {
                    return bad("n_stumps");
                }
            }
            Hyperparams::LogReg(p) => {
                if !(p.lr > 0.0) || p.l2 < 0.0 || p.epochs == 0 || !(p.tol > 0.0) {
                    return bad("lr, epochs and tol");
                }
            }
            Hyperparams::Knn(p) => {
                if p.k == 0 {
                    return bad("k");
                }
            }
            Hyperparams::NaiveBayes(p) => {
                if !(p.var_floor > 0.0) {
                    return bad("var_floor");
                }
            }
            Hyperparams::Mlp(p) => {
                if p.hidden == 0 || !(p.lr > 0.0) || p.epochs == 0 {
                    return bad("hidden, lr and epochs");
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnedParams {
    Svm(SvmModel),
    #[serde(rename = "gradboost")]
    GradBoost(GradBoostModel),
    #[serde(rename = "adaboost")]
    AdaBoost(AdaBoostModel),
    #[serde(rename = "logreg")]
    LogReg(LogRegModel),
    Knn(KnnModel),
    NaiveBayes(NaiveBayesModel),
    Mlp(MlpModel),
}

/// A fitted classifier together with the exact settings that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: ClassifierKind,
    pub hyperparams: Hyperparams,
    pub params: LearnedParams,
    pub n_features: usize,
    pub seed: u64,
    /// False when an iteration cap was hit before the solver's stopping rule.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub labels: Vec<u8>,
    pub scores: Vec<f64>,
}

fn check_inputs(x: &Array2<f64>, y: &[u8]) -> Result<()> {
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
    if let Some(&l) = y.iter().find(|&&l| l > 1) {
        return Err(Error::InvalidArgument(format!("label {l} is not binary")));
    }
    if !(y.contains(&0) && y.contains(&1)) {
        return Err(Error::SingleClass);
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("training matrix".into()));
    }
    Ok(())
}

pub fn train(kind: ClassifierKind, x: &Array2<f64>, y: &[u8], hp: &Hyperparams, seed: u64) -> Result<TrainedModel> {
    if hp.kind() != kind {
        return Err(Error::InvalidArgument(format!(
            "hyperparameters for {} given to {kind}",
            hp.kind()
        )));
    }
    hp.validate()?;
    check_inputs(x, y)?;
    let x = x.as_standard_layout().into_owned();

    let (params, hyperparams, converged) = match hp {
        Hyperparams::Svm(p) => {
            let (m, resolved, ok) = svm::fit(&x, y, p);
            (LearnedParams::Svm(m), Hyperparams::Svm(resolved), ok)
        }
        Hyperparams::GradBoost(p) => (LearnedParams::GradBoost(gboost::fit(&x, y, p)), hp.clone(), true),
        Hyperparams::AdaBoost(p) => (LearnedParams::AdaBoost(adaboost::fit(&x, y, p)), hp.clone(), true),
        Hyperparams::LogReg(p) => {
            let (m, ok) = logreg::fit(&x, y, p);
            (LearnedParams::LogReg(m), hp.clone(), ok)
        }
        Hyperparams::Knn(p) => (LearnedParams::Knn(KnnModel::fit(&x, y, p)), hp.clone(), true),
        Hyperparams::NaiveBayes(p) => (
            LearnedParams::NaiveBayes(NaiveBayesModel::fit(&x, y, p)),
            hp.clone(),
            true,
        ),
        Hyperparams::Mlp(p) => {
            let (m, ok) = mlp::fit(&x, y, p, seed);
            (LearnedParams::Mlp(m), hp.clone(), ok)
        }
    };
    Ok(TrainedModel {
        kind,
        hyperparams,
        params,
        n_features: x.ncols(),
        seed,
        converged,
    })
}

impl TrainedModel {
    /// Score for one row and the label it implies.
    pub fn predict_row(&self, row: &[f64]) -> (u8, f64) {
        let (score, threshold) = match &self.params {
            LearnedParams::Svm(m) => (m.decision(row), 0.0),
            LearnedParams::GradBoost(m) => (m.score(row), 0.5),
            LearnedParams::AdaBoost(m) => (m.score(row), 0.0),
            LearnedParams::LogReg(m) => (m.score(row), 0.5),
            LearnedParams::Knn(m) => (m.score(row), 0.5),
            LearnedParams::NaiveBayes(m) => (m.score(row), 0.0),
            LearnedParams::Mlp(m) => (m.score(row), 0.5),
        };
        (u8::from(score > threshold), score)
    }

    pub fn predict(&self, x: &Array2<f64>) -> Result<Prediction> {
        if x.ncols() != self.n_features {
            return Err(Error::Shape {
                expected: self.n_features,
                got: x.ncols(),
            });
        }
        let (labels, scores) = x
            .rows()
            .into_iter()
            .map(|r| self.predict_row(&r.to_vec()))
            .unzip();
        Ok(Prediction { labels, scores })
    }
}

/// Classifiers whose training objective has an analytic gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientCheckKind {
    LogReg,
    Mlp { hidden: usize },
}

/// Largest relative gap between the analytic gradient and central finite
/// differences (h = 1e-5), at parameters drawn uniformly from (-0.5, 0.5).
/// Relative error is `|a - n| / max(|a|, |n|, 1e-8)`.
pub fn gradient_oracle_check(kind: GradientCheckKind, x: &Array2<f64>, y: &[u8], seed: u64) -> Result<f64> {
    check_inputs(x, y)?;
    let x = x.as_standard_layout().into_owned();
    let p = x.ncols();
    let mut rng = Rng::new(seed);
    let (analytic, numeric) = match kind {
        GradientCheckKind::LogReg => {
            let l2 = LogRegParams::default().l2;
            let theta: Vec<f64> = (0..=p).map(|_| rng.uniform_in(-0.5, 0.5)).collect();
            let (_, g) = logreg::loss_and_grad(&theta, &x, y, l2);
            let n = finite_diff_grad(|t| logreg::loss_and_grad(t, &x, y, l2).0, &theta, 1e-5)?;
            (g, n)
        }
        GradientCheckKind::Mlp { hidden } => {
            let rows: Vec<usize> = (0..x.nrows()).collect();
            let size = hidden * p + 2 * hidden + 1;
            let theta: Vec<f64> = (0..size).map(|_| rng.uniform_in(-0.5, 0.5)).collect();
            let model = MlpModel::from_flat(&theta, p, hidden, Activation::Logistic);
            let (_, g) = model.loss_and_grad(&x, y, &rows);
            let n = finite_diff_grad(
                |t| {
                    MlpModel::from_flat(t, p, hidden, Activation::Logistic)
                        .loss_and_grad(&x, y, &rows)
                        .0
                },
                &theta,
                1e-5,
            )?;
            (g, n)
        }
    };
    Ok(analytic
        .iter()
        .zip(&numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-8))
        .fold(0.0, f64::max))
}
