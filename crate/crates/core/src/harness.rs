//! The evaluation grid: every (selector, size, classifier) cell trained on
//! one shared split and scored on its held-out rows, plus the paired
//! all-features versus RFE comparison on the 13-feature data.

use std::time::Instant;

use ndarray::Axis;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{hex_digest, Dataset, SchemaKind, DEFAULT_TEST_FRACTION};
use crate::error::{Error, Result};
use crate::learners::{train, ClassifierKind, Hyperparams, KernelKind, LogRegParams, SvmParams};
use crate::metrics::{confusion, metrics, ConfusionMatrix, MetricKey, MetricsRecord, PositiveClass};
use crate::pipeline::{prepare, ModelArtifact, Prepared};
use crate::selectors::{rank_features, rfe_select, FeatureSet, SelectorConfig, SelectorKind};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SIZES: [usize; 4] = [10, 15, 20, 25];

/// Kernels and penalties tried when looking for the best SVM cell.
pub const SVM_SWEEP_KERNELS: [KernelKind; 3] = [KernelKind::Linear, KernelKind::Rbf, KernelKind::Poly];
pub const SVM_SWEEP_C: [f64; 3] = [0.1, 1.0, 10.0];

/// Seeds for repeating the paired validation.
pub const VALIDATION_SEEDS: [u64; 5] = [42, 43, 44, 45, 46];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub seed: u64,
    pub test_fraction: f64,
    pub sizes: Vec<usize>,
    pub selectors: Vec<SelectorKind>,
    pub classifiers: Vec<ClassifierKind>,
    /// Per-classifier overrides; kinds not listed use their defaults.
    pub hyperparams: Vec<Hyperparams>,
    pub selector_config: SelectorConfig,
    pub positive: PositiveClass,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            test_fraction: DEFAULT_TEST_FRACTION,
            sizes: DEFAULT_SIZES.to_vec(),
            selectors: SelectorKind::ALL.to_vec(),
            classifiers: ClassifierKind::ALL.to_vec(),
            hyperparams: Vec::new(),
            selector_config: SelectorConfig::default(),
            positive: PositiveClass::Minority,
        }
    }
}

impl GridConfig {
    pub fn hyperparams_for(&self, kind: ClassifierKind) -> Hyperparams {
        self.hyperparams
            .iter()
            .rev()
            .find(|h| h.kind() == kind)
            .cloned()
            .unwrap_or_else(|| Hyperparams::default_for(kind))
    }

    /// Sets or replaces the override for `hp.kind()`.
    pub fn set_hyperparams(&mut self, hp: Hyperparams) {
        self.hyperparams.retain(|h| h.kind() != hp.kind());
        self.hyperparams.push(hp);
    }

    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::InvalidArgument("grid needs at least one set size".into()));
        }
        if let Some(&k) = self.sizes.iter().find(|&&k| k == 0 || k > n_features) {
            return Err(Error::InvalidArgument(format!(
                "set size {k} outside 1..={n_features}"
            )));
        }
        if self.selectors.is_empty() || self.classifiers.is_empty() {
            return Err(Error::InvalidArgument(
                "grid needs at least one selector and one classifier".into(),
            ));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "test fraction {} outside (0, 1)",
                self.test_fraction
            )));
        }
        for hp in &self.hyperparams {
            hp.validate()?;
        }
        Ok(())
    }

    /// SHA-256 of the configuration's JSON form.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(self).expect("config serializes"));
        hex_digest(h)
    }

    /// Canonical order: sizes ascending and deduplicated, selectors and
    /// classifiers in their fixed report order.
    pub fn normalized(&self) -> Self {
        let mut c = self.clone();
        c.sizes.sort_unstable();
        c.sizes.dedup();
        c.selectors.sort_unstable();
        c.selectors.dedup();
        c.classifiers.sort_unstable();
        c.classifiers.dedup();
        c
    }
}

/// Knobs that change how the grid runs but not what it computes.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the available parallelism.
    pub jobs: Option<usize>,
    /// Record per-cell wall time. Off by default so reports stay byte-identical.
    pub timing: bool,
    /// Keep the trained models so they can be written as artifacts.
    pub keep_models: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub set_id: String,
    pub selector: SelectorKind,
    pub k: usize,
    pub classifier: ClassifierKind,
    /// Selected columns in rank order (0-based); empty if selection failed.
    pub features: Vec<usize>,
    pub status: CellStatus,
    pub error: Option<String>,
    pub confusion: Option<ConfusionMatrix>,
    pub metrics: Option<MetricsRecord>,
    pub converged: Option<bool>,
    pub wall_time_ms: Option<f64>,
    pub split_hash: String,
}

impl EvalRecord {
    pub fn metric(&self, key: MetricKey) -> Option<f64> {
        self.metrics.map(|m| m.get(key))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub schema_kind: SchemaKind,
    pub seed: u64,
    pub test_fraction: f64,
    pub n_rows: usize,
    pub n_features: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub split_hash: String,
    pub config_hash: String,
    pub positive_class: PositiveClass,
    /// The label that `positive_class` resolved to.
    pub positive_label: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCell {
    pub rank: usize,
    pub set_id: String,
    pub classifier: ClassifierKind,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub schema_version: u32,
    pub provenance: Provenance,
    pub config: GridConfig,
    pub records: Vec<EvalRecord>,
    /// Successful cells ranked by accuracy.
    pub best: Vec<RankedCell>,
}

impl GridReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: GridReport = serde_json::from_str(text)?;
        if report.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidArgument(format!(
                "report schema version {} is not {SCHEMA_VERSION}",
                report.schema_version
            )));
        }
        Ok(report)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.records.iter().map(|r| r.k).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    pub fn find(&self, selector: SelectorKind, k: usize, classifier: ClassifierKind) -> Option<&EvalRecord> {
        self.records
            .iter()
            .find(|r| r.selector == selector && r.k == k && r.classifier == classifier)
    }

    pub fn top(&self) -> Option<&EvalRecord> {
        rank_models(&self.records, MetricKey::Accuracy)
            .first()
            .map(|&i| &self.records[i])
            .filter(|r| r.status == CellStatus::Ok)
    }
}

/// Indices of `records`, best first: the chosen metric, then accuracy, then
/// precision (all descending), then smaller `k`, then set id. Failed cells
/// come last in their original order.
pub fn rank_models(records: &[EvalRecord], key: MetricKey) -> Vec<usize> {
    let mut order: Vec<usize> = (0..records.len()).collect();
    let sort_key = |r: &EvalRecord| {
        r.metrics
            .map(|m| (m.get(key), m.accuracy, m.precision))
            .unwrap_or((f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY))
    };
    order.sort_by(|&a, &b| {
        let (ra, rb) = (&records[a], &records[b]);
        let (ka, kb) = (sort_key(ra), sort_key(rb));
        kb.0.total_cmp(&ka.0)
            .then(kb.1.total_cmp(&ka.1))
            .then(kb.2.total_cmp(&ka.2))
            .then(ra.k.cmp(&rb.k))
            .then(ra.set_id.cmp(&rb.set_id))
    });
    order
}

fn best_list(records: &[EvalRecord]) -> Vec<RankedCell> {
    rank_models(records, MetricKey::Accuracy)
        .into_iter()
        .filter_map(|i| {
            let r = &records[i];
            r.metrics.map(|m| (r, m))
        })
        .enumerate()
        .map(|(pos, (r, m))| RankedCell {
            rank: pos + 1,
            set_id: r.set_id.clone(),
            classifier: r.classifier,
            accuracy: m.accuracy,
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
        })
        .collect()
}

/// One fitted and scored cell.
struct CellOutcome {
    confusion: ConfusionMatrix,
    metrics: MetricsRecord,
    converged: bool,
    artifact: Option<ModelArtifact>,
}

struct GridContext<'a> {
    dataset: &'a Dataset,
    prepared: &'a Prepared,
    config: &'a GridConfig,
    positive: u8,
    keep_models: bool,
}

fn fit_and_score(ctx: &GridContext<'_>, set: &FeatureSet, kind: ClassifierKind) -> Result<CellOutcome> {
    let columns = set.columns();
    let x_train = ctx.prepared.x_train.select(Axis(1), &columns);
    let x_test = ctx.prepared.x_test.select(Axis(1), &columns);
    let hp = ctx.config.hyperparams_for(kind);
    let model = train(kind, &x_train, &ctx.prepared.y_train, &hp, ctx.config.seed)?;
    let prediction = model.predict(&x_test)?;
    if prediction.scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite(format!("{kind} scores")));
    }
    let cm = confusion(&ctx.prepared.y_test, &prediction.labels, ctx.positive)?;
    let converged = model.converged;
    let artifact = ctx.keep_models.then(|| ModelArtifact {
        model,
        feature_mask: set.clone(),
        scaler: ctx.prepared.scaler.clone(),
        encodings: ctx.dataset.encodings.clone(),
        schema_kind: ctx.dataset.schema_kind,
        schema: ctx.dataset.schema.clone(),
    });
    Ok(CellOutcome {
        metrics: metrics(&cm),
        confusion: cm,
        converged,
        artifact,
    })
}

/// A grid report plus, when requested, the model behind each record.
pub struct GridRun {
    pub report: GridReport,
    pub models: Vec<Option<ModelArtifact>>,
}

pub fn run_grid(dataset: &Dataset, config: &GridConfig) -> Result<GridReport> {
    Ok(run_grid_with(dataset, config, &RunOptions::default())?.report)
}

/// Runs every cell. Only dataset-level problems (bad config, unsplittable
/// labels) are errors; a failing selector or classifier marks its cells
/// as failed and the rest of the grid carries on.
pub fn run_grid_with(dataset: &Dataset, config: &GridConfig, options: &RunOptions) -> Result<GridRun> {
    let config = config.normalized();
    config.validate(dataset.n_features())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| grid_inner(dataset, &config, options))
}

fn grid_inner(dataset: &Dataset, config: &GridConfig, options: &RunOptions) -> Result<GridRun> {
    let prepared = prepare(dataset, config.test_fraction, config.seed)?;
    let split_hash = prepared.split.test_hash();
    let positive = config.positive.resolve(&dataset.y);
    let names = dataset.feature_names();
    let (k_min, k_max) = (config.sizes[0], *config.sizes.last().unwrap());

    let rankings: Vec<Result<Vec<usize>>> = config
        .selectors
        .par_iter()
        .map(|&kind| {
            rank_features(
                kind,
                &prepared.x_train,
                &prepared.y_train,
                k_min,
                k_max,
                &config.selector_config,
                config.seed,
            )
        })
        .collect();

    // Canonical cell order: selector, size, classifier.
    let mut cells: Vec<(Result<FeatureSet>, ClassifierKind)> = Vec::new();
    for (&selector, ranking) in config.selectors.iter().zip(&rankings) {
        for (pos, &k) in config.sizes.iter().enumerate() {
            let set = match ranking {
                Ok(r) => FeatureSet::from_ranking(selector, pos + 1, k, r, &names),
                Err(e) => Err(Error::InvalidArgument(format!("{selector} selection failed: {e}"))),
            };
            for &kind in &config.classifiers {
                let set = match &set {
                    Ok(s) => Ok(s.clone()),
                    Err(e) => Err(Error::InvalidArgument(e.to_string())),
                };
                cells.push((set, kind));
            }
        }
    }

    let ctx = GridContext {
        dataset,
        prepared: &prepared,
        config,
        positive,
        keep_models: options.keep_models,
    };
    let set_ids: Vec<(String, SelectorKind, usize)> = config
        .selectors
        .iter()
        .flat_map(|&s| {
            config
                .sizes
                .iter()
                .enumerate()
                .map(move |(pos, &k)| (format!("{}{}", pos + 1, s.letter()), s, k))
        })
        .collect();

    let outcomes: Vec<(EvalRecord, Option<ModelArtifact>)> = cells
        .par_iter()
        .enumerate()
        .map(|(i, (set, kind))| {
            let (set_id, selector, k) = set_ids[i / config.classifiers.len()].clone();
            let start = Instant::now();
            let result = set.as_ref().map_err(|e| Error::InvalidArgument(e.to_string())).and_then(|s| fit_and_score(&ctx, s, *kind));
            let wall_time_ms = options.timing.then(|| start.elapsed().as_secs_f64() * 1000.0);
            let features = set.as_ref().map(|s| s.indices.clone()).unwrap_or_default();
            let mut record = EvalRecord {
                set_id,
                selector,
                k,
                classifier: *kind,
                features,
                status: CellStatus::Ok,
                error: None,
                confusion: None,
                metrics: None,
                converged: None,
                wall_time_ms,
                split_hash: split_hash.clone(),
            };
            match result {
                Ok(out) => {
                    record.confusion = Some(out.confusion);
                    record.metrics = Some(out.metrics);
                    record.converged = Some(out.converged);
                    (record, out.artifact)
                }
                Err(e) => {
                    record.status = CellStatus::Failed;
                    record.error = Some(e.to_string());
                    (record, None)
                }
            }
        })
        .collect();

    let (records, models): (Vec<EvalRecord>, Vec<Option<ModelArtifact>>) = outcomes.into_iter().unzip();
    let best = best_list(&records);
    let report = GridReport {
        schema_version: SCHEMA_VERSION,
        provenance: Provenance {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            schema_kind: dataset.schema_kind,
            seed: config.seed,
            test_fraction: config.test_fraction,
            n_rows: dataset.n_rows(),
            n_features: dataset.n_features(),
            n_train: prepared.split.train_indices.len(),
            n_test: prepared.split.test_indices.len(),
            split_hash,
            config_hash: config.hash(),
            positive_class: config.positive,
            positive_label: positive,
        },
        config: config.clone(),
        records,
        best,
    };
    Ok(GridRun { report, models })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidationConfig {
    pub seed: u64,
    pub test_fraction: f64,
    pub rfe_k: usize,
    pub svm: SvmParams,
    pub rfe: LogRegParams,
    pub positive: PositiveClass,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            test_fraction: DEFAULT_TEST_FRACTION,
            rfe_k: 10,
            svm: SvmParams::default(),
            rfe: LogRegParams::default(),
            positive: PositiveClass::Minority,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredModel {
    pub confusion: ConfusionMatrix,
    pub metrics: MetricsRecord,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub config: ValidationConfig,
    pub split_hash: String,
    pub positive_label: u8,
    pub rfe_features: FeatureSet,
    pub baseline: ScoredModel,
    pub improved: ScoredModel,
    /// `improved.accuracy - baseline.accuracy`, as a fraction.
    pub delta_accuracy: f64,
}

/// SVM on every column against SVM on an RFE subset chosen from the
/// training rows, both scored on the same held-out rows.
pub fn validate_combined(dataset: &Dataset, config: &ValidationConfig) -> Result<ValidationReport> {
    let p = dataset.n_features();
    if config.rfe_k == 0 || config.rfe_k > p {
        return Err(Error::InvalidArgument(format!(
            "RFE size {} outside 1..={p}",
            config.rfe_k
        )));
    }
    let prepared = prepare(dataset, config.test_fraction, config.seed)?;
    let positive = config.positive.resolve(&dataset.y);
    let hp = Hyperparams::Svm(config.svm.clone());
    let score = |columns: &[usize]| -> Result<ScoredModel> {
        let model = train(
            ClassifierKind::Svm,
            &prepared.x_train.select(Axis(1), columns),
            &prepared.y_train,
            &hp,
            config.seed,
        )?;
        let pred = model.predict(&prepared.x_test.select(Axis(1), columns))?;
        let cm = confusion(&prepared.y_test, &pred.labels, positive)?;
        Ok(ScoredModel {
            metrics: metrics(&cm),
            confusion: cm,
            converged: model.converged,
        })
    };
    let all: Vec<usize> = (0..p).collect();
    let baseline = score(&all)?;
    let rfe_features = rfe_select(
        &prepared.x_train,
        &prepared.y_train,
        config.rfe_k,
        &dataset.feature_names(),
        &config.rfe,
    )?;
    let improved = score(&rfe_features.columns())?;
    Ok(ValidationReport {
        config: config.clone(),
        split_hash: prepared.split.test_hash(),
        positive_label: positive,
        delta_accuracy: improved.metrics.accuracy - baseline.metrics.accuracy,
        rfe_features,
        baseline,
        improved,
    })
}
