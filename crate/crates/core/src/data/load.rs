use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::data::schema::{normalize_name, FeatureSpec, SchemaKind};
use crate::error::{Error, Result};

/// One column as read from the file, before label encoding.
#[derive(Debug, Clone, PartialEq)]
pub enum RawColumn {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

/// A parsed CSV whose categorical cells are still text.
#[derive(Debug, Clone)]
pub struct RawDataset {
    pub schema_kind: SchemaKind,
    pub schema: Vec<FeatureSpec>,
    pub columns: Vec<RawColumn>,
    pub y: Vec<u8>,
    /// 1-based data row numbers dropped under [`LoadOptions::skip_invalid_rows`].
    pub skipped_rows: Vec<usize>,
}

impl RawDataset {
    pub fn n_rows(&self) -> usize {
        self.y.len()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Drop rows with missing or unparseable cells instead of failing.
    pub skip_invalid_rows: bool,
}

pub fn load_csv(path: impl AsRef<Path>, kind: SchemaKind) -> Result<RawDataset> {
    load_csv_with(path, kind, LoadOptions::default())
}

pub fn load_csv_with(
    path: impl AsRef<Path>,
    kind: SchemaKind,
    options: LoadOptions,
) -> Result<RawDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, kind, options, &path.display().to_string())
}

/// Reads CSV text from any reader; `source` names the input in errors.
pub fn read_csv<R: Read>(
    reader: R,
    kind: SchemaKind,
    options: LoadOptions,
    source: &str,
) -> Result<RawDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();

    let header = match records.next() {
        Some(r) => r?,
        None => return Err(Error::EmptyDataset(source.to_string())),
    };
    let schema = kind.features();
    let (feature_cols, label_col) = map_header(&header, &schema, kind)?;

    let label_name = &header[label_col];
    let mut cells: Vec<Vec<String>> = vec![Vec::new(); schema.len()];
    let mut y = Vec::new();
    let mut skipped = Vec::new();

    for (i, record) in records.enumerate() {
        let row = i + 1;
        let record = record?;
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        let parsed = (|| {
            if record.len() != header.len() {
                return Err(Error::SchemaMismatch(format!(
                    "row {row} has {} fields, header has {}",
                    record.len(),
                    header.len()
                )));
            }
            let label = parse_label(&record[label_col]).ok_or_else(|| Error::Parse {
                row,
                column: label_name.to_string(),
                value: record[label_col].to_string(),
            })?;
            let mut values = Vec::with_capacity(schema.len());
            for (spec, &col) in schema.iter().zip(&feature_cols) {
                let cell = &record[col];
                let bad = || Error::Parse {
                    row,
                    column: spec.name.clone(),
                    value: cell.to_string(),
                };
                if is_missing(cell) {
                    return Err(bad());
                }
                if !spec.kind.is_categorical() {
                    let v: f64 = cell.parse().map_err(|_| bad())?;
                    if !v.is_finite() {
                        return Err(bad());
                    }
                }
                values.push(cell.to_string());
            }
            Ok((label, values))
        })();
        match parsed {
            Ok((label, values)) => {
                y.push(label);
                for (col, v) in cells.iter_mut().zip(values) {
                    col.push(v);
                }
            }
            Err(Error::Parse { .. }) if options.skip_invalid_rows => skipped.push(row),
            Err(e) => return Err(e),
        }
    }

    if y.is_empty() {
        return Err(Error::EmptyDataset(source.to_string()));
    }

    let columns = schema
        .iter()
        .zip(cells)
        .map(|(spec, col)| {
            if spec.kind.is_categorical() {
                RawColumn::Categorical(col)
            } else {
                // Already validated above.
                RawColumn::Numeric(col.iter().map(|c| c.parse().unwrap()).collect())
            }
        })
        .collect();

    Ok(RawDataset {
        schema_kind: kind,
        schema,
        columns,
        y,
        skipped_rows: skipped,
    })
}

fn map_header(
    header: &csv::StringRecord,
    schema: &[FeatureSpec],
    kind: SchemaKind,
) -> Result<(Vec<usize>, usize)> {
    let mut feature_cols: Vec<Option<usize>> = vec![None; schema.len()];
    let mut label_col = None;
    let label_names: Vec<String> = kind.label_names().iter().map(|n| normalize_name(n)).collect();

    for (col, name) in header.iter().enumerate() {
        if let Some(f) = schema.iter().position(|s| s.matches(name)) {
            if feature_cols[f].is_some() {
                return Err(Error::SchemaMismatch(format!(
                    "column `{name}` duplicates feature `{}`",
                    schema[f].name
                )));
            }
            feature_cols[f] = Some(col);
        } else if label_names.contains(&normalize_name(name)) {
            if label_col.is_some() {
                return Err(Error::SchemaMismatch(format!("duplicate label column `{name}`")));
            }
            label_col = Some(col);
        } else {
            return Err(Error::SchemaMismatch(format!("unexpected column `{name}`")));
        }
    }

    if let Some(missing) = schema.iter().zip(&feature_cols).find(|(_, c)| c.is_none()) {
        return Err(Error::SchemaMismatch(format!("missing column `{}`", missing.0.name)));
    }
    let label_col = label_col.ok_or_else(|| {
        Error::SchemaMismatch(format!("missing label column `{}`", kind.label_names()[0]))
    })?;
    Ok((feature_cols.into_iter().map(Option::unwrap).collect(), label_col))
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell == "?" || cell.eq_ignore_ascii_case("na") || cell.eq_ignore_ascii_case("nan")
}

/// `Cad`/`yes`/`true`/`positive` and any number above zero map to 1.
fn parse_label(cell: &str) -> Option<u8> {
    match cell.to_ascii_lowercase().as_str() {
        "cad" | "yes" | "y" | "true" | "positive" => return Some(1),
        "normal" | "no" | "n" | "false" | "negative" => return Some(0),
        _ => {}
    }
    let v: f64 = cell.parse().ok()?;
    if !v.is_finite() || v < 0.0 {
        return None;
    }
    Some(u8::from(v > 0.0))
}
