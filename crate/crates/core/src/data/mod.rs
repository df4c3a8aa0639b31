//! Loading, encoding, scaling and splitting of the tabular datasets.

mod encode;
mod load;
mod scale;
mod schema;
mod split;

use std::path::Path;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

pub use encode::{encode_labels, CategoryMap, Encodings, MAX_CATEGORIES};
pub use load::{load_csv, load_csv_with, read_csv, LoadOptions, RawColumn, RawDataset};
pub use scale::{minmax_scale, ScalerParams};
pub use schema::{normalize_name, FeatureKind, FeatureSpec, SchemaKind};
pub use split::{stratified_split, DataSplit, DEFAULT_TEST_FRACTION};
pub(crate) use split::hex_digest;

use crate::error::{Error, Result};

/// Numeric feature matrix with binary labels (1 = CAD).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DatasetFile", into = "DatasetFile")]
pub struct Dataset {
    pub schema_kind: SchemaKind,
    pub schema: Vec<FeatureSpec>,
    pub x: Array2<f64>,
    pub y: Vec<u8>,
    pub encodings: Encodings,
    pub scaled: bool,
}

impl Dataset {
    /// Loads and label-encodes a CSV in one step.
    pub fn from_csv(path: impl AsRef<Path>, kind: SchemaKind, options: LoadOptions) -> Result<Self> {
        encode_labels(&load_csv_with(path, kind, options)?)
    }

    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.schema.iter().map(|f| f.name.clone()).collect()
    }

    /// `(negatives, positives)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.y.iter().filter(|&&v| v == 1).count();
        (self.y.len() - pos, pos)
    }

    pub fn stratified_split(&self, test_fraction: f64, seed: u64) -> Result<DataSplit> {
        stratified_split(&self.y, test_fraction, seed)
    }

    /// Rows restricted to `rows`, in the given order.
    pub fn subset_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select(Axis(0), rows),
            y: rows.iter().map(|&i| self.y[i]).collect(),
            ..self.clone()
        }
    }

    /// Columns restricted to `features`, with the schema and encodings to match.
    pub fn subset_features(&self, features: &[usize]) -> Dataset {
        Dataset {
            schema_kind: self.schema_kind,
            schema: features.iter().map(|&j| self.schema[j].clone()).collect(),
            x: self.x.select(Axis(1), features),
            y: self.y.clone(),
            encodings: Encodings {
                columns: features
                    .iter()
                    .map(|&j| self.encodings.columns.get(j).cloned().flatten())
                    .collect(),
            },
            scaled: self.scaled,
        }
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// On-disk form of [`Dataset`]: the matrix is stored row by row.
#[derive(Serialize, Deserialize)]
struct DatasetFile {
    schema_kind: SchemaKind,
    schema: Vec<FeatureSpec>,
    encodings: Encodings,
    scaled: bool,
    rows: Vec<Vec<f64>>,
    labels: Vec<u8>,
}

impl From<Dataset> for DatasetFile {
    fn from(d: Dataset) -> Self {
        DatasetFile {
            rows: d.x.axis_iter(Axis(0)).map(|r| r.to_vec()).collect(),
            schema_kind: d.schema_kind,
            schema: d.schema,
            encodings: d.encodings,
            scaled: d.scaled,
            labels: d.y,
        }
    }
}

impl TryFrom<DatasetFile> for Dataset {
    type Error = String;

    fn try_from(f: DatasetFile) -> std::result::Result<Self, String> {
        let p = f.schema.len();
        if f.rows.len() != f.labels.len() {
            return Err(format!("{} rows but {} labels", f.rows.len(), f.labels.len()));
        }
        if let Some((i, r)) = f.rows.iter().enumerate().find(|(_, r)| r.len() != p) {
            return Err(format!("row {i} has {} values, schema has {p}", r.len()));
        }
        let flat: Vec<f64> = f.rows.into_iter().flatten().collect();
        let x = Array2::from_shape_vec((f.labels.len(), p), flat).map_err(|e| e.to_string())?;
        Ok(Dataset {
            schema_kind: f.schema_kind,
            schema: f.schema,
            x,
            y: f.labels,
            encodings: f.encodings,
            scaled: f.scaled,
        })
    }
}
