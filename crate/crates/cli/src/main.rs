use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use icardo::data::{Dataset, LoadOptions, SchemaKind};
use icardo::harness::{
    run_grid_with, validate_combined, GridConfig, GridReport, RunOptions, ValidationConfig, ValidationReport,
    VALIDATION_SEEDS,
};
use icardo::learners::{ClassifierKind, Hyperparams, KernelKind};
use icardo::metrics::{format_percent, PositiveClass};
use icardo::pipeline::{prepare, record_from_json, ModelArtifact};
use icardo::report::{emit_report, ReportFormat};
use icardo::selectors::{chi_square_select, lasso_select, rfe_select, tree_importance_select, SelectorKind};

/// Feature selection and classifier benchmarking for tabular
/// cardiovascular-disease data.
#[derive(Parser, Debug)]
#[command(name = "icardo", version, about)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// JSON config file with optional "grid" and "validate" sections; flags win over it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Random seed [default: 42]
    #[arg(long, global = true, env = "ICARDO_SEED")]
    seed: Option<u64>,
    /// Held-out fraction for the stratified split [default: 0.30]
    #[arg(long, global = true)]
    test_fraction: Option<f64>,
    /// Which label counts as positive in precision and recall [default: minority]
    #[arg(long, global = true, value_parser = ["minority", "cad"])]
    positive: Option<String>,
    /// Worker threads for the grid [default: available parallelism]
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load and encode a CSV, print a summary and cache the encoded dataset
    Ingest(IngestArgs),
    /// Run one selector on the training rows and print the feature set as JSON
    Select(SelectArgs),
    /// Train and score every (selector, size, classifier) cell
    Grid(GridArgs),
    /// Compare SVM on all features with SVM on an RFE subset
    Validate(ValidateArgs),
    /// Score raw records with a saved model
    Predict(PredictArgs),
    /// Re-render the report files from an existing report.json
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct DataArgs {
    /// CSV file, or a dataset JSON written by `ingest`
    data: PathBuf,
    /// Column layout of a CSV input [default: alizadeh56, uci13 for validate]
    #[arg(long, value_parser = ["alizadeh56", "uci13"])]
    schema: Option<String>,
    /// Drop rows with missing or malformed cells instead of failing [default: off]
    #[arg(long)]
    skip_invalid_rows: bool,
}

#[derive(Args, Debug)]
struct IngestArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Where to write the encoded dataset [default: <input>.dataset.json]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SelectArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Selection algorithm
    #[arg(long, value_parser = ["rfe", "lasso", "chi2", "tree"])]
    selector: String,
    /// Number of features to keep
    #[arg(long)]
    k: usize,
    /// Also write the feature set JSON here [default: stdout only]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Output directory [default: report]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated report formats: json, csv, markdown, svg [default: all four]
    #[arg(long, value_delimiter = ',')]
    formats: Option<Vec<String>>,
    /// Comma-separated feature-set sizes [default: 10,15,20,25]
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Comma-separated selectors [default: rfe,lasso,chi2,tree]
    #[arg(long, value_delimiter = ',')]
    selectors: Option<Vec<String>>,
    /// Comma-separated classifiers [default: svm,gradboost,adaboost,logreg,knn,naive_bayes,mlp]
    #[arg(long, value_delimiter = ',')]
    classifiers: Option<Vec<String>>,
    #[command(flatten)]
    svm: SvmArgs,
    /// Write every trained model to <out>/models [default: off]
    #[arg(long)]
    save_models: bool,
    /// Record per-cell wall time; reports are then no longer byte-reproducible [default: off]
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
struct SvmArgs {
    /// SVM kernel [default: rbf]
    #[arg(long, value_parser = ["linear", "rbf", "poly"])]
    svm_kernel: Option<String>,
    /// SVM penalty C [default: 1.0]
    #[arg(long)]
    svm_c: Option<f64>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Number of features RFE keeps [default: 10]
    #[arg(long)]
    rfe_k: Option<usize>,
    #[command(flatten)]
    svm: SvmArgs,
    /// Repeat over the fixed seeds 42..=46 and report how many show a gain of at least 2 points [default: off]
    #[arg(long)]
    sweep: bool,
    /// Also write the JSON result here [default: none]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PredictArgs {
    /// Model artifact written by `grid --save-models`
    #[arg(long)]
    model: PathBuf,
    /// One record as a JSON object, or @path to a JSON file
    #[arg(long, conflicts_with = "csv", required_unless_present = "csv")]
    record: Option<String>,
    /// CSV file with a header row; every row is scored
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// report.json from a previous grid run
    report: PathBuf,
    /// Output directory [default: directory of the input report]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated report formats [default: csv,markdown,svg]
    #[arg(long, value_delimiter = ',')]
    formats: Option<Vec<String>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    grid: Option<GridConfig>,
    validate: Option<ValidationConfig>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(icardo::Error),
}

impl From<icardo::Error> for CliError {
    fn from(e: icardo::Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_list<T: std::str::FromStr<Err = String>>(items: &[String]) -> CliResult<Vec<T>> {
    items.iter().map(|s| s.trim().parse::<T>().map_err(usage)).collect()
}

fn read_file_config(path: Option<&Path>) -> CliResult<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("invalid config {}: {e}", path.display())))
}

fn load_dataset(args: &DataArgs, default_schema: SchemaKind) -> CliResult<Dataset> {
    let is_json = args.data.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let ds = if is_json {
        Dataset::read_json(&args.data)?
    } else {
        let schema = match &args.schema {
            Some(s) => s.parse::<SchemaKind>().map_err(usage)?,
            None => default_schema,
        };
        let options = LoadOptions {
            skip_invalid_rows: args.skip_invalid_rows,
        };
        Dataset::from_csv(&args.data, schema, options)?
    };
    Ok(ds)
}

fn apply_svm(args: &SvmArgs, params: &mut icardo::learners::SvmParams) -> CliResult<()> {
    if let Some(k) = &args.svm_kernel {
        params.kernel = k.parse::<KernelKind>().map_err(usage)?;
    }
    if let Some(c) = args.svm_c {
        params.c = c;
    }
    Ok(())
}

fn positive_flag(global: &GlobalArgs) -> CliResult<Option<PositiveClass>> {
    global
        .positive
        .as_deref()
        .map(|p| p.parse::<PositiveClass>().map_err(usage))
        .transpose()
}

fn print_resolved<T: Serialize>(what: &str, value: &T) {
    eprintln!(
        "resolved {what} config: {}",
        serde_json::to_string(value).expect("config serializes")
    );
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| icardo::Error::Io {
            path: parent.to_path_buf(),
            source: e,
        })?;
    }
    std::fs::write(path, text).map_err(|e| {
        icardo::Error::Io {
            path: path.to_path_buf(),
            source: e,
        }
        .into()
    })
}

fn cmd_ingest(args: &IngestArgs) -> CliResult<()> {
    let ds = load_dataset(&args.data, SchemaKind::Alizadeh56)?;
    let (neg, pos) = ds.class_counts();
    println!(
        "{} rows, {pos} positive-CAD, {neg} normal, {} features (schema {})",
        ds.n_rows(),
        ds.n_features(),
        ds.schema_kind
    );
    for (j, f) in ds.schema.iter().enumerate() {
        let kind = serde_json::to_value(f.kind).expect("kind serializes");
        let detail = match ds.encodings.get(j) {
            Some(map) => format!(" ({} categories)", map.len()),
            None => String::new(),
        };
        println!("  f{:<3} {:<24} {}{detail}", f.index, f.name, kind.as_str().unwrap_or_default());
    }
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| args.data.data.with_extension("dataset.json"));
    ds.write_json(&out)?;
    println!("encoded dataset written to {}", out.display());
    Ok(())
}

fn cmd_select(global: &GlobalArgs, args: &SelectArgs) -> CliResult<()> {
    if args.k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    let file = read_file_config(global.config.as_deref())?;
    let mut config = file.grid.unwrap_or_default();
    if let Some(s) = global.seed {
        config.seed = s;
    }
    if let Some(f) = global.test_fraction {
        config.test_fraction = f;
    }
    let ds = load_dataset(&args.data, SchemaKind::Alizadeh56)?;
    if args.k > ds.n_features() {
        return Err(usage(format!("--k {} exceeds the {} features", args.k, ds.n_features())));
    }
    let selector: SelectorKind = args.selector.parse().map_err(usage)?;
    print_resolved("select", &serde_json::json!({
        "seed": config.seed,
        "test_fraction": config.test_fraction,
        "selector": selector,
        "k": args.k,
        "selector_config": config.selector_config,
    }));
    let prepared = prepare(&ds, config.test_fraction, config.seed)?;
    let names = ds.feature_names();
    let (x, y) = (&prepared.x_train, &prepared.y_train);
    let set = match selector {
        SelectorKind::Rfe => rfe_select(x, y, args.k, &names, &config.selector_config.rfe)?,
        SelectorKind::Lasso => lasso_select(x, y, args.k, &names, &config.selector_config.lasso)?,
        SelectorKind::ChiSquare => chi_square_select(x, y, args.k, &names)?,
        SelectorKind::TreeBased => {
            tree_importance_select(x, y, args.k, &names, &config.selector_config.forest, config.seed)?
        }
    };
    let text = serde_json::to_string_pretty(&set).map_err(icardo::Error::from)? + "\n";
    print!("{text}");
    if let Some(out) = &args.out {
        write_text(out, &text)?;
    }
    Ok(())
}

fn parse_formats(items: Option<&Vec<String>>, default: &[ReportFormat]) -> CliResult<Vec<ReportFormat>> {
    match items {
        Some(list) => parse_list(&list.iter().filter(|s| !s.trim().is_empty()).cloned().collect::<Vec<_>>()),
        None => Ok(default.to_vec()),
    }
}

fn cmd_grid(global: &GlobalArgs, args: &GridArgs) -> CliResult<()> {
    let file = read_file_config(global.config.as_deref())?;
    let mut config = file.grid.unwrap_or_default();
    if let Some(s) = global.seed {
        config.seed = s;
    }
    if let Some(f) = global.test_fraction {
        config.test_fraction = f;
    }
    if let Some(p) = positive_flag(global)? {
        config.positive = p;
    }
    if let Some(s) = &args.sizes {
        config.sizes = s.clone();
    }
    if let Some(s) = &args.selectors {
        config.selectors = parse_list(s)?;
    }
    if let Some(c) = &args.classifiers {
        config.classifiers = parse_list(c)?;
    }
    if args.svm.svm_kernel.is_some() || args.svm.svm_c.is_some() {
        let mut svm = match config.hyperparams_for(ClassifierKind::Svm) {
            Hyperparams::Svm(p) => p,
            _ => unreachable!("svm override has svm kind"),
        };
        apply_svm(&args.svm, &mut svm)?;
        config.set_hyperparams(Hyperparams::Svm(svm));
    }
    let formats = parse_formats(args.formats.as_ref(), &ReportFormat::ALL)?;
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from("report"));

    let ds = load_dataset(&args.data, SchemaKind::Alizadeh56)?;
    let config = config.normalized();
    config.validate(ds.n_features()).map_err(|e| usage(e.to_string()))?;
    print_resolved("grid", &config);
    if global.jobs == Some(0) {
        return Err(usage("--jobs must be at least 1"));
    }
    let options = RunOptions {
        jobs: global.jobs,
        timing: args.timing,
        keep_models: args.save_models,
    };
    let run = run_grid_with(&ds, &config, &options)?;
    let report = &run.report;
    for path in emit_report(report, &formats, &out)? {
        eprintln!("wrote {}", path.display());
    }
    if args.save_models {
        let dir = out.join("models");
        for (rec, model) in report.records.iter().zip(&run.models) {
            if let Some(m) = model {
                m.write_json(dir_file(&dir, &format!("{}_{}.json", rec.set_id, rec.classifier))?)?;
            }
        }
        eprintln!("models written to {}", dir.display());
    }
    let failed = report.records.len() - report.best.len();
    println!(
        "{} cells evaluated, {failed} failed, split {}",
        report.records.len(),
        &report.provenance.split_hash[..12]
    );
    match report.best.first() {
        Some(b) => println!(
            "top: {} on set {} ({} features): accuracy {}%, precision {}%, recall {}%, F1 {}%",
            b.classifier.display_name(),
            b.set_id,
            report.records.iter().find(|r| r.set_id == b.set_id).map_or(0, |r| r.k),
            format_percent(b.accuracy),
            format_percent(b.precision),
            format_percent(b.recall),
            format_percent(b.f1)
        ),
        None => println!("top: none (every cell failed)"),
    }
    Ok(())
}

fn dir_file(dir: &Path, name: &str) -> CliResult<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| icardo::Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    Ok(dir.join(name))
}

fn cmd_validate(global: &GlobalArgs, args: &ValidateArgs) -> CliResult<()> {
    let file = read_file_config(global.config.as_deref())?;
    let mut config = file.validate.unwrap_or_default();
    if let Some(s) = global.seed {
        config.seed = s;
    }
    if let Some(f) = global.test_fraction {
        config.test_fraction = f;
    }
    if let Some(p) = positive_flag(global)? {
        config.positive = p;
    }
    if let Some(k) = args.rfe_k {
        config.rfe_k = k;
    }
    apply_svm(&args.svm, &mut config.svm)?;
    let ds = load_dataset(&args.data, SchemaKind::Uci13)?;
    if config.rfe_k == 0 || config.rfe_k > ds.n_features() {
        return Err(usage(format!("--rfe-k must lie in 1..={}", ds.n_features())));
    }
    print_resolved("validate", &config);

    let seeds: Vec<u64> = if args.sweep { VALIDATION_SEEDS.to_vec() } else { vec![config.seed] };
    let mut reports: Vec<ValidationReport> = Vec::new();
    for seed in seeds {
        let cfg = ValidationConfig { seed, ..config.clone() };
        let r = validate_combined(&ds, &cfg)?;
        println!(
            "seed {seed}: baseline {}% -> RFE-{} {}% (delta {:+.2} points)",
            format_percent(r.baseline.metrics.accuracy),
            cfg.rfe_k,
            format_percent(r.improved.metrics.accuracy),
            100.0 * r.delta_accuracy
        );
        reports.push(r);
    }
    if let [only] = reports.as_slice() {
        println!("RFE features: {}", only.rfe_features.feature_names.join(", "));
    } else {
        let wins = reports.iter().filter(|r| r.delta_accuracy >= 0.02 - 1e-12).count();
        println!("{wins} of {} seeds gain at least 2 points", reports.len());
    }
    if let Some(out) = &args.out {
        let text = if reports.len() == 1 {
            serde_json::to_string_pretty(&reports[0])
        } else {
            serde_json::to_string_pretty(&reports)
        }
        .map_err(icardo::Error::from)?;
        write_text(out, &(text + "\n"))?;
    }
    Ok(())
}

fn cmd_predict(args: &PredictArgs) -> CliResult<()> {
    let model = ModelArtifact::read_json(&args.model)?;
    let records: Vec<BTreeMap<String, String>> = if let Some(r) = &args.record {
        let text = match r.strip_prefix('@') {
            Some(path) => std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {path}: {e}")))?,
            None => r.clone(),
        };
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| usage(format!("record is not valid JSON: {e}")))?;
        match value {
            serde_json::Value::Array(items) => items.iter().map(record_from_json).collect::<Result<_, _>>()?,
            v => vec![record_from_json(&v)?],
        }
    } else {
        let path = args.csv.as_ref().expect("clap requires --record or --csv");
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        let header = reader.headers().map_err(|e| usage(e.to_string()))?.clone();
        reader
            .records()
            .map(|row| {
                let row = row.map_err(|e| usage(e.to_string()))?;
                Ok(header.iter().zip(row.iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect())
            })
            .collect::<CliResult<_>>()?
    };
    for (i, record) in records.iter().enumerate() {
        let (label, score) = model.predict_raw(record)?;
        println!(
            "{}",
            serde_json::json!({"row": i, "label": label, "score": score, "class": if label == 1 { "CAD" } else { "Normal" }})
        );
    }
    Ok(())
}

fn cmd_report(args: &ReportArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.report).map_err(|e| icardo::Error::Io {
        path: args.report.clone(),
        source: e,
    })?;
    let report = GridReport::from_json(&text)?;
    let formats = parse_formats(
        args.formats.as_ref(),
        &[ReportFormat::Csv, ReportFormat::Markdown, ReportFormat::Svg],
    )?;
    let out = args.out.clone().unwrap_or_else(|| {
        args.report
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."))
    });
    for path in emit_report(&report, &formats, &out)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Some(f) = cli.global.test_fraction {
        if !(f > 0.0 && f < 1.0) {
            return Err(usage("--test-fraction must lie strictly between 0 and 1"));
        }
    }
    match &cli.command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Select(a) => cmd_select(&cli.global, a),
        Command::Grid(a) => cmd_grid(&cli.global, a),
        Command::Validate(a) => cmd_validate(&cli.global, a),
        Command::Predict(a) => cmd_predict(a),
        Command::Report(a) => cmd_report(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    std::panic::set_hook(Box::new(|info| eprintln!("internal error: {info}")));
    match std::panic::catch_unwind(|| run(&cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            match e {
                CliError::Core(ref c) if c.is_numerical() => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
        Err(_) => {
            eprintln!("error: internal failure");
            ExitCode::from(3)
        }
    }
}
