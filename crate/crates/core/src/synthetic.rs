//! Seeded stand-in CSVs with the same columns as the real files, for demos
//! and tests. A handful of columns carry class signal; the rest are noise.

use crate::data::{FeatureKind, SchemaKind};
use crate::numerics::Rng;

const LEVELS: [&str; 4] = ["Mild", "Moderate", "N", "Severe"];

/// CSV text with `n_rows` rows, `n_positive` of them labelled as disease.
/// Column `j` (0-based) is informative when `j % 6 == 1`.
pub fn synthetic_csv(kind: SchemaKind, n_rows: usize, n_positive: usize, seed: u64) -> String {
    assert!(n_positive <= n_rows);
    let mut rng = Rng::new(seed);
    let mut labels: Vec<u8> = (0..n_rows).map(|i| u8::from(i < n_positive)).collect();
    rng.shuffle(&mut labels);
    let features = kind.features();

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = features.iter().map(|f| f.name.clone()).collect();
    header.push(kind.label_names()[0].to_string());
    w.write_record(&header).expect("in-memory write");

    for &label in &labels {
        let mut row = Vec::with_capacity(header.len());
        for (j, f) in features.iter().enumerate() {
            let shift = if j % 6 == 1 { 0.5 * (f64::from(label) - 0.5) } else { 0.0 };
            let z = rng.normal(shift, 0.5);
            row.push(cell(kind, f.kind, f.declared_range, z, &mut rng));
        }
        row.push(match kind {
            SchemaKind::Alizadeh56 => if label == 1 { "Cad" } else { "Normal" }.to_string(),
            SchemaKind::Uci13 => {
                if label == 1 {
                    (1 + rng.below(4)).to_string()
                } else {
                    "0".to_string()
                }
            }
        });
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

fn cell(kind: SchemaKind, feature: FeatureKind, range: Option<(f64, f64)>, z: f64, rng: &mut Rng) -> String {
    let u = 1.0 / (1.0 + (-2.0 * z).exp());
    match feature {
        FeatureKind::Numeric => {
            let (lo, hi) = range.unwrap_or((0.0, 200.0));
            let v = lo + (hi - lo) * u;
            format!("{:.1}", v)
        }
        FeatureKind::BinaryCategorical => {
            let yes = rng.uniform() < u;
            match kind {
                SchemaKind::Alizadeh56 => if yes { "Y" } else { "N" }.to_string(),
                SchemaKind::Uci13 => u8::from(yes).to_string(),
            }
        }
        FeatureKind::MultiCategorical => {
            let level = ((u * 4.0) as usize).min(3);
            match kind {
                SchemaKind::Alizadeh56 => LEVELS[level].to_string(),
                SchemaKind::Uci13 => level.to_string(),
            }
        }
    }
}
