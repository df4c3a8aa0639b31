//! Confusion counts and the four scalar scores derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    pub positive_class: u8,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// The same predictions read with the other class as positive.
    pub fn swapped(&self) -> Self {
        Self {
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
            positive_class: 1 - self.positive_class,
        }
    }
}

pub fn confusion(y_true: &[u8], y_pred: &[u8], positive: u8) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Shape {
            expected: y_true.len(),
            got: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::InvalidArgument("confusion matrix of zero rows".into()));
    }
    let mut cm = ConfusionMatrix {
        tp: 0,
        fp: 0,
        fn_: 0,
        tn: 0,
        positive_class: positive,
    };
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t == positive, p == positive) {
            (true, true) => cm.tp += 1,
            (false, true) => cm.fp += 1,
            (true, false) => cm.fn_ += 1,
            (false, false) => cm.tn += 1,
        }
    }
    Ok(cm)
}

/// Fractions in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Zero denominators give 0 rather than NaN.
pub fn metrics(cm: &ConfusionMatrix) -> MetricsRecord {
    let (tp, fp, fn_, tn) = (cm.tp as f64, cm.fp as f64, cm.fn_ as f64, cm.tn as f64);
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    MetricsRecord {
        accuracy: ratio(tp + tn, tp + fp + fn_ + tn),
        precision,
        recall,
        f1: ratio(2.0 * precision * recall, precision + recall),
    }
}

impl MetricsRecord {
    pub fn get(&self, key: MetricKey) -> f64 {
        match key {
            MetricKey::Accuracy => self.accuracy,
            MetricKey::Precision => self.precision,
            MetricKey::Recall => self.recall,
            MetricKey::F1 => self.f1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKey {
    Accuracy,
    Precision,
    Recall,
    F1,
}

impl MetricKey {
    pub const ALL: [MetricKey; 4] = [MetricKey::Accuracy, MetricKey::Precision, MetricKey::Recall, MetricKey::F1];

    pub fn label(self) -> &'static str {
        match self {
            MetricKey::Accuracy => "Accuracy",
            MetricKey::Precision => "Precision",
            MetricKey::Recall => "Recall",
            MetricKey::F1 => "F1",
        }
    }
}

impl std::str::FromStr for MetricKey {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "accuracy" | "acc" => MetricKey::Accuracy,
            "precision" => MetricKey::Precision,
            "recall" => MetricKey::Recall,
            "f1" | "f1_score" => MetricKey::F1,
            other => return Err(format!("unknown metric `{other}`")),
        })
    }
}

/// Which label counts as positive when scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PositiveClass {
    /// The rarer label in the data being evaluated; label 1 on a tie.
    Minority,
    /// Label 1.
    Cad,
}

impl PositiveClass {
    pub fn resolve(self, y: &[u8]) -> u8 {
        match self {
            PositiveClass::Cad => 1,
            PositiveClass::Minority => {
                let pos = y.iter().filter(|&&v| v == 1).count();
                u8::from(pos * 2 <= y.len())
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PositiveClass::Minority => "minority",
            PositiveClass::Cad => "cad",
        }
    }
}

impl std::str::FromStr for PositiveClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "minority" => Ok(PositiveClass::Minority),
            "cad" => Ok(PositiveClass::Cad),
            other => Err(format!("unknown positive-class convention `{other}`")),
        }
    }
}

/// Fraction as a percentage with two decimals, halves rounded away from zero.
pub fn format_percent(fraction: f64) -> String {
    let hundredths = (fraction * 10_000.0 * (1.0 + f64::EPSILON)).round();
    format!("{:.2}", hundredths / 100.0)
}
