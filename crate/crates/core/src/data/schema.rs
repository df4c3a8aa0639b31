use serde::{Deserialize, Serialize};

/// Which of the two supported column layouts a CSV follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemaKind {
    /// Z-Alizadeh Sani: 56 clinical features plus the `Cath` label.
    Alizadeh56,
    /// Combined Cleveland / Hungarian / Switzerland / Long Beach VA: 13 features plus `num`.
    Uci13,
}

impl SchemaKind {
    pub fn features(self) -> Vec<FeatureSpec> {
        let table = match self {
            SchemaKind::Alizadeh56 => ALIZADEH56,
            SchemaKind::Uci13 => UCI13,
        };
        table
            .iter()
            .enumerate()
            .map(|(i, &(name, aliases, kind, range))| FeatureSpec {
                index: i + 1,
                name: name.to_string(),
                aliases: aliases.iter().map(|a| a.to_string()).collect(),
                kind,
                declared_range: range,
            })
            .collect()
    }

    /// Accepted header names for the label column; the first is canonical.
    pub fn label_names(self) -> &'static [&'static str] {
        match self {
            SchemaKind::Alizadeh56 => &["Cath", "label", "target"],
            SchemaKind::Uci13 => &["num", "target", "condition", "label"],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SchemaKind::Alizadeh56 => "alizadeh56",
            SchemaKind::Uci13 => "uci13",
        }
    }
}

impl std::str::FromStr for SchemaKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "alizadeh56" => Ok(SchemaKind::Alizadeh56),
            "uci13" => Ok(SchemaKind::Uci13),
            other => Err(format!("unknown schema `{other}` (expected alizadeh56 or uci13)")),
        }
    }
}

impl std::fmt::Display for SchemaKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureKind {
    Numeric,
    BinaryCategorical,
    MultiCategorical,
}

impl FeatureKind {
    pub fn is_categorical(self) -> bool {
        !matches!(self, FeatureKind::Numeric)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    /// 1-based id; feature `i` is reported as `f{i}`.
    pub index: usize,
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<String>,
    pub kind: FeatureKind,
    pub declared_range: Option<(f64, f64)>,
}

impl FeatureSpec {
    pub fn symbol(&self) -> String {
        format!("f{}", self.index)
    }

    /// Whether a CSV header cell names this feature.
    pub fn matches(&self, header: &str) -> bool {
        let h = normalize_name(header);
        h == normalize_name(&self.name)
            || h == self.symbol()
            || self.aliases.iter().any(|a| normalize_name(a) == h)
    }
}

/// Lower-cases and collapses runs of whitespace.
pub fn normalize_name(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

use FeatureKind::{BinaryCategorical as B, MultiCategorical as M, Numeric as N};

type Row = (&'static str, &'static [&'static str], FeatureKind, Option<(f64, f64)>);

const ALIZADEH56: &[Row] = &[
    ("Age", &[], N, Some((30.0, 86.0))),
    ("Sex", &[], B, None),
    ("DM", &["Diabetes mellitus"], B, None),
    ("EX-Smoker", &["Ex smoker"], B, None),
    ("Current Smoker", &[], B, None),
    ("HTN", &["Hypertension"], B, None),
    ("FH", &["Family history"], B, None),
    ("BMI", &[], N, Some((18.0, 41.0))),
    ("DLP", &["Dyslipidemia"], B, None),
    ("Airway disease", &[], B, None),
    ("CRF", &[], B, None),
    ("CVA", &[], B, None),
    ("CHF", &[], B, None),
    ("Obesity", &[], B, None),
    ("Thyroid Disease", &[], B, None),
    ("Edema", &[], B, None),
    ("Systolic Murmur", &[], B, None),
    ("Typical Chest Pain", &["Typical CP"], B, None),
    ("Atypical", &[], B, None),
    ("Weak Peripheral Pulse", &[], B, None),
    ("Exertional CP", &["Exertional Chest Pain"], B, None),
    ("Nonanginal", &["Nonanginal CP"], B, None),
    ("Dyspnea", &[], B, None),
    ("Lung rales", &[], B, None),
    ("Diastolic Murmur", &[], B, None),
    ("LowTH Ang", &["Low Th Ang", "Low Threshold angina"], B, None),
    ("BP", &["Blood Pressure"], N, Some((90.0, 190.0))),
    ("Function Class", &[], M, None),
    ("PR", &["Pulse Rate"], N, Some((50.0, 110.0))),
    ("St Elevation", &[], B, None),
    ("Poor R Progression", &["Poor R Wave Progression"], B, None),
    ("Tinversion", &["T inversion"], B, None),
    ("Q Wave", &[], B, None),
    ("LVH", &[], B, None),
    ("St Depression", &[], B, None),
    ("Rhythm", &[], B, None),
    ("Lymph", &[], N, Some((7.0, 60.0))),
    ("K", &["Potassium"], N, Some((3.0, 6.6))),
    ("VHD", &[], M, None),
    ("BUN", &[], N, Some((6.0, 52.0))),
    ("CR", &["Creatine", "Creatinine"], N, Some((0.5, 2.2))),
    ("LDL", &[], N, Some((18.0, 232.0))),
    ("TG", &["Triglyceride"], N, Some((37.0, 1050.0))),
    ("ESR", &[], N, Some((1.0, 90.0))),
    ("Neut", &["Neutrophil"], N, Some((32.0, 89.0))),
    ("HDL", &[], N, Some((15.0, 111.0))),
    ("HB", &["Haemoglobin", "Hemoglobin"], N, Some((8.9, 17.6))),
    ("PLT", &["Platelet"], N, Some((25.0, 742.0))),
    ("FBS", &[], N, Some((62.0, 400.0))),
    ("Na", &["Sodium"], N, Some((128.0, 156.0))),
    ("Region RWMA", &["Region with RWMA", "RWMA"], M, None),
    ("EF-TTE", &["EF", "Ejection Fraction"], N, Some((15.0, 60.0))),
    ("WBC", &[], N, Some((3700.0, 18000.0))),
    ("BBB", &[], M, None),
    ("Weight", &[], N, Some((48.0, 120.0))),
    ("Length", &["Height"], N, Some((140.0, 188.0))),
];

const UCI13: &[Row] = &[
    ("age", &[], N, None),
    ("sex", &[], B, None),
    ("cp", &["chest pain type"], M, None),
    ("trestbps", &["resting blood pressure"], N, None),
    ("chol", &["serum cholesterol"], N, None),
    ("fbs", &["fasting blood sugar"], B, None),
    ("restecg", &[], M, None),
    ("thalach", &["thalch", "max heart rate"], N, None),
    ("exang", &[], B, None),
    ("oldpeak", &[], N, None),
    ("slope", &[], M, None),
    ("ca", &[], M, None),
    ("thal", &[], M, None),
];
