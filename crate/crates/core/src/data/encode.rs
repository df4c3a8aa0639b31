use std::collections::{BTreeMap, BTreeSet};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::data::load::{RawColumn, RawDataset};
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Upper bound on distinct values in a categorical column.
pub const MAX_CATEGORIES: usize = 16;

/// Category string -> integer code for one column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryMap {
    pub codes: BTreeMap<String, u32>,
}

impl CategoryMap {
    /// Lexicographic codes, except that a yes/no column always gets no=0, yes=1.
    pub fn fit<'a>(values: impl IntoIterator<Item = &'a str>) -> Self {
        let distinct: BTreeSet<&str> = values.into_iter().collect();
        let codes = if let Some(codes) = yes_no_codes(&distinct) {
            codes
        } else {
            distinct
                .into_iter()
                .enumerate()
                .map(|(i, v)| (v.to_string(), i as u32))
                .collect()
        };
        Self { codes }
    }

    pub fn encode(&self, value: &str) -> Option<u32> {
        self.codes.get(value).copied()
    }

    pub fn decode(&self, code: u32) -> Option<&str> {
        self.codes
            .iter()
            .find(|(_, &c)| c == code)
            .map(|(v, _)| v.as_str())
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }
}

fn yes_no_codes(distinct: &BTreeSet<&str>) -> Option<BTreeMap<String, u32>> {
    let code = |v: &str| match v.to_ascii_lowercase().as_str() {
        "no" | "n" => Some(0),
        "yes" | "y" => Some(1),
        _ => None,
    };
    distinct
        .iter()
        .map(|v| code(v).map(|c| (v.to_string(), c)))
        .collect()
}

/// Per-feature category maps; `None` for numeric columns.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Encodings {
    pub columns: Vec<Option<CategoryMap>>,
}

impl Encodings {
    pub fn get(&self, feature: usize) -> Option<&CategoryMap> {
        self.columns.get(feature).and_then(Option::as_ref)
    }
}

/// Replaces every categorical column with integer codes.
pub fn encode_labels(raw: &RawDataset) -> Result<Dataset> {
    let n = raw.n_rows();
    let p = raw.columns.len();
    let mut x = Array2::<f64>::zeros((n, p));
    let mut maps = Vec::with_capacity(p);

    for (j, (col, spec)) in raw.columns.iter().zip(&raw.schema).enumerate() {
        match col {
            RawColumn::Numeric(values) => {
                for (i, &v) in values.iter().enumerate() {
                    x[(i, j)] = v;
                }
                maps.push(None);
            }
            RawColumn::Categorical(values) => {
                let map = CategoryMap::fit(values.iter().map(String::as_str));
                if map.len() > MAX_CATEGORIES {
                    return Err(Error::Cardinality {
                        column: spec.name.clone(),
                        count: map.len(),
                        limit: MAX_CATEGORIES,
                    });
                }
                for (i, v) in values.iter().enumerate() {
                    x[(i, j)] = f64::from(map.encode(v).expect("value seen during fit"));
                }
                maps.push(Some(map));
            }
        }
    }

    Ok(Dataset {
        schema_kind: raw.schema_kind,
        schema: raw.schema.clone(),
        x,
        y: raw.y.clone(),
        encodings: Encodings { columns: maps },
        scaled: false,
    })
}
