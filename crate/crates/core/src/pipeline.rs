//! Split, scale and package: the glue between an encoded dataset and the
//! model inputs, plus self-contained model artifacts that accept raw records.

use std::collections::BTreeMap;
use std::path::Path;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::data::{DataSplit, Dataset, Encodings, FeatureKind, FeatureSpec, ScalerParams, SchemaKind};
use crate::error::{Error, Result};
use crate::learners::{Prediction, TrainedModel};
use crate::selectors::FeatureSet;

/// An encoded dataset after the split, with the scaler fitted on the
/// training rows and applied to every row.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub split: DataSplit,
    pub scaler: ScalerParams,
    pub x_train: Array2<f64>,
    pub y_train: Vec<u8>,
    pub x_test: Array2<f64>,
    pub y_test: Vec<u8>,
}

pub fn prepare(dataset: &Dataset, test_fraction: f64, seed: u64) -> Result<Prepared> {
    if dataset.n_rows() == 0 {
        return Err(Error::EmptyDataset("no rows to split".into()));
    }
    let split = dataset.stratified_split(test_fraction, seed)?;
    let scaler = ScalerParams::fit(&dataset.x, Some(&split.train_indices));
    let scaled = scaler.transform(&dataset.x);
    let pick = |rows: &[usize]| -> (Array2<f64>, Vec<u8>) {
        (
            scaled.select(Axis(0), rows),
            rows.iter().map(|&i| dataset.y[i]).collect(),
        )
    };
    let (x_train, y_train) = pick(&split.train_indices);
    let (x_test, y_test) = pick(&split.test_indices);
    Ok(Prepared {
        split,
        scaler,
        x_train,
        y_train,
        x_test,
        y_test,
    })
}

/// A trained model with everything needed to score a raw record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    #[serde(flatten)]
    pub model: TrainedModel,
    pub feature_mask: FeatureSet,
    pub scaler: ScalerParams,
    pub encodings: Encodings,
    pub schema_kind: SchemaKind,
    pub schema: Vec<FeatureSpec>,
}

impl ModelArtifact {
    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Scores rows that are already encoded and scaled over the full schema.
    pub fn predict_scaled(&self, x_full: &Array2<f64>) -> Result<Prediction> {
        if x_full.ncols() != self.schema.len() {
            return Err(Error::Shape {
                expected: self.schema.len(),
                got: x_full.ncols(),
            });
        }
        self.model.predict(&x_full.select(Axis(1), &self.feature_mask.columns()))
    }

    /// Encodes, scales and scores one raw record keyed by column name,
    /// alias or `fN` symbol. Only the masked features are required.
    pub fn predict_raw(&self, record: &BTreeMap<String, String>) -> Result<(u8, f64)> {
        let mut row = Vec::with_capacity(self.feature_mask.k);
        for j in self.feature_mask.columns() {
            let spec = &self.schema[j];
            let value = record
                .iter()
                .find(|(key, _)| spec.matches(key))
                .map(|(_, v)| v.trim())
                .ok_or_else(|| Error::MissingFeature(spec.name.clone()))?;
            let encoded = self.encode_value(j, value)?;
            row.push(self.scaler.scale_value(j, encoded));
        }
        Ok(self.model.predict_row(&row))
    }

    fn encode_value(&self, j: usize, value: &str) -> Result<f64> {
        let spec = &self.schema[j];
        match self.encodings.get(j) {
            Some(map) => map
                .encode(value)
                .or_else(|| {
                    // JSON numbers such as 1.0 for a stored category "1".
                    value
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.fract() == 0.0)
                        .and_then(|v| map.encode(&format!("{}", v as i64)))
                })
                .map(f64::from)
                .ok_or_else(|| Error::UnknownCategory {
                    feature: spec.name.clone(),
                    value: value.to_string(),
                }),
            None => {
                debug_assert_eq!(spec.kind, FeatureKind::Numeric);
                value
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        row: 1,
                        column: spec.name.clone(),
                        value: value.to_string(),
                    })
            }
        }
    }
}

/// Flattens a JSON object of scalars into the string record that
/// [`ModelArtifact::predict_raw`] takes.
pub fn record_from_json(value: &serde_json::Value) -> Result<BTreeMap<String, String>> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::InvalidArgument("record must be a JSON object".into()))?;
    obj.iter()
        .map(|(k, v)| {
            let s = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) => n.to_string(),
                serde_json::Value::Bool(b) => b.to_string(),
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "field `{k}` has unsupported value {other}"
                    )))
                }
            };
            Ok((k.clone(), s))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{read_csv, encode_labels, LoadOptions};
    use crate::learners::{train, ClassifierKind, Hyperparams};
    use crate::selectors::SelectorKind;

    const CSV: &str = "age,sex,cp,trestbps,chol,fbs,restecg,thalach,exang,oldpeak,slope,ca,thal,num
63,1,1,145,233,1,2,150,0,2.3,3,0,6,0
67,1,4,160,286,0,2,108,1,1.5,2,3,3,2
37,1,3,130,250,0,0,187,0,3.5,3,0,3,0
41,0,2,130,204,0,2,172,0,1.4,1,0,3,0
62,0,4,140,268,0,2,160,0,3.6,3,2,3,3
57,1,4,140,192,0,0,148,0,0.4,2,0,6,0
56,1,2,120,236,0,0,178,0,0.8,1,0,3,1
";

    #[test]
    fn raw_record_matches_scaled_pipeline() {
        let raw = read_csv(CSV.as_bytes(), SchemaKind::Uci13, LoadOptions::default(), "inline").unwrap();
        let ds = encode_labels(&raw).unwrap();
        let scaler = ScalerParams::fit(&ds.x, None);
        let xs = scaler.transform(&ds.x);
        let names = ds.feature_names();
        let set = FeatureSet::from_ranking(SelectorKind::ChiSquare, 1, 3, &[7, 0, 3], &names).unwrap();
        let sub = xs.select(Axis(1), &set.columns());
        let kind = ClassifierKind::LogReg;
        let model = train(kind, &sub, &ds.y, &Hyperparams::default_for(kind), 0).unwrap();
        let art = ModelArtifact {
            model,
            feature_mask: set,
            scaler,
            encodings: ds.encodings.clone(),
            schema_kind: ds.schema_kind,
            schema: ds.schema.clone(),
        };
        let batch = art.predict_scaled(&xs).unwrap();
        let header: Vec<&str> = CSV.lines().next().unwrap().split(',').collect();
        for (i, line) in CSV.lines().skip(1).enumerate() {
            let record: BTreeMap<String, String> = header
                .iter()
                .zip(line.split(','))
                .map(|(h, v)| (h.to_string(), v.to_string()))
                .collect();
            let (label, score) = art.predict_raw(&record).unwrap();
            assert_eq!(label, batch.labels[i]);
            assert_eq!(score, batch.scores[i]);
        }

        let mut partial = BTreeMap::new();
        partial.insert("age".to_string(), "50".to_string());
        assert!(matches!(art.predict_raw(&partial), Err(Error::MissingFeature(f)) if f == "trestbps"));
    }
}
