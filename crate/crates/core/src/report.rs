//! Report files: JSON, CSV, a Markdown results table and SVG bar charts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{CellStatus, GridReport};
use crate::learners::ClassifierKind;
use crate::metrics::{format_percent, MetricKey};
use crate::selectors::SelectorKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
    Svg,
}

impl ReportFormat {
    pub const ALL: [ReportFormat; 4] = [ReportFormat::Json, ReportFormat::Csv, ReportFormat::Markdown, ReportFormat::Svg];
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "svg" => Ok(ReportFormat::Svg),
            other => Err(format!("unknown report format `{other}`")),
        }
    }
}

pub const CSV_HEADER: [&str; 14] = [
    "set_id",
    "selector",
    "k",
    "classifier",
    "tp",
    "fp",
    "fn",
    "tn",
    "accuracy",
    "precision",
    "recall",
    "f1",
    "converged",
    "wall_time_ms",
];

pub fn to_csv(report: &GridReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    let opt = |v: Option<String>| v.unwrap_or_default();
    for r in &report.records {
        let cm = r.confusion.as_ref();
        let m = r.metrics.as_ref();
        w.write_record([
            r.set_id.clone(),
            r.selector.to_string(),
            r.k.to_string(),
            r.classifier.to_string(),
            opt(cm.map(|c| c.tp.to_string())),
            opt(cm.map(|c| c.fp.to_string())),
            opt(cm.map(|c| c.fn_.to_string())),
            opt(cm.map(|c| c.tn.to_string())),
            opt(m.map(|m| m.accuracy.to_string())),
            opt(m.map(|m| m.precision.to_string())),
            opt(m.map(|m| m.recall.to_string())),
            opt(m.map(|m| m.f1.to_string())),
            opt(r.converged.map(|c| c.to_string())),
            opt(r.wall_time_ms.map(|t| t.to_string())),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn selectors_in(report: &GridReport) -> Vec<SelectorKind> {
    let mut s: Vec<SelectorKind> = report.records.iter().map(|r| r.selector).collect();
    s.sort_unstable();
    s.dedup();
    s
}

fn classifiers_in(report: &GridReport) -> Vec<ClassifierKind> {
    let mut c: Vec<ClassifierKind> = report.records.iter().map(|r| r.classifier).collect();
    c.sort_unstable();
    c.dedup();
    c
}

/// Classifier blocks of one row per selector; four metric columns per set
/// size. Missing or failed cells read "NA".
pub fn to_markdown(report: &GridReport) -> String {
    let sizes = report.sizes();
    let mut out = String::new();
    let p = &report.provenance;
    let _ = writeln!(out, "# Model performance by feature set\n");
    let _ = writeln!(
        out,
        "Schema {}, seed {}, {} training / {} test rows, positive label {} ({}). Values in percent.\n",
        p.schema_kind,
        p.seed,
        p.n_train,
        p.n_test,
        p.positive_label,
        p.positive_class.as_str()
    );

    out.push_str("| Models | Feature selection |");
    for k in &sizes {
        for m in MetricKey::ALL {
            let _ = write!(out, " {k} {} |", m.label());
        }
    }
    out.push_str("\n|---|---|");
    for _ in 0..sizes.len() * 4 {
        out.push_str("---:|");
    }
    out.push('\n');

    for classifier in classifiers_in(report) {
        for (row, selector) in selectors_in(report).into_iter().enumerate() {
            let name = if row == 0 {
                format!("**{}**", classifier.display_name())
            } else {
                String::new()
            };
            let _ = write!(out, "| {name} | {} |", selector.display_name());
            for &k in &sizes {
                let rec = report.find(selector, k, classifier);
                for m in MetricKey::ALL {
                    let cell = rec
                        .filter(|r| r.status == CellStatus::Ok)
                        .and_then(|r| r.metric(m))
                        .map_or_else(|| "NA".to_string(), format_percent);
                    let _ = write!(out, " {cell} |");
                }
            }
            out.push('\n');
        }
    }
    out
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const PLOT_LEFT: f64 = 70.0;
const PLOT_RIGHT: f64 = 640.0;
const PLOT_TOP: f64 = 50.0;
const PLOT_BOTTOM: f64 = 420.0;
const PALETTE: [&str; 7] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn svg_open(title: &str, y_label: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="800" height="480" viewBox="0 0 800 480" font-family="sans-serif">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="28" font-size="16" text-anchor="middle">{}</text>"#,
        (PLOT_LEFT + PLOT_RIGHT) / 2.0,
        escape(title)
    );
    for tick in (0..=100).step_by(20) {
        let y = y_at(f64::from(tick));
        let _ = writeln!(
            s,
            r##"<line x1="{PLOT_LEFT}" y1="{y:.2}" x2="{PLOT_RIGHT}" y2="{y:.2}" stroke="#dddddd"/>"##
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.2}" font-size="11" text-anchor="end">{tick}%</text>"#,
            PLOT_LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text transform="translate(20 {:.1}) rotate(-90)" font-size="12" text-anchor="middle">{}</text>"#,
        (PLOT_TOP + PLOT_BOTTOM) / 2.0,
        escape(y_label)
    );
    let _ = writeln!(
        s,
        r##"<line x1="{PLOT_LEFT}" y1="{PLOT_BOTTOM}" x2="{PLOT_RIGHT}" y2="{PLOT_BOTTOM}" stroke="#333333"/>"##
    );
    s
}

fn y_at(percent: f64) -> f64 {
    PLOT_BOTTOM - (PLOT_BOTTOM - PLOT_TOP) * percent.clamp(0.0, 100.0) / 100.0
}

/// Grouped bars for one selector: one group per set size, one bar per
/// classifier, bar height = accuracy.
pub fn selector_svg(report: &GridReport, selector: SelectorKind) -> String {
    let sizes = report.sizes();
    let classifiers = classifiers_in(report);
    let mut s = svg_open(
        &format!("Accuracy on {} feature sets", selector.display_name()),
        "Accuracy (%)",
    );
    let group_w = (PLOT_RIGHT - PLOT_LEFT) / sizes.len().max(1) as f64;
    let bar_w = group_w * 0.8 / classifiers.len().max(1) as f64;
    for (g, &k) in sizes.iter().enumerate() {
        let gx = PLOT_LEFT + group_w * g as f64 + group_w * 0.1;
        for (b, &c) in classifiers.iter().enumerate() {
            let x = gx + bar_w * b as f64;
            let color = PALETTE[c as usize % PALETTE.len()];
            let acc = report
                .find(selector, k, c)
                .filter(|r| r.status == CellStatus::Ok)
                .and_then(|r| r.metric(MetricKey::Accuracy));
            match acc {
                Some(a) => {
                    let y = y_at(a * 100.0);
                    let _ = writeln!(
                        s,
                        r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{color}"><title>{} {}: {}%</title></rect>"#,
                        bar_w * 0.9,
                        PLOT_BOTTOM - y,
                        c.display_name(),
                        k,
                        format_percent(a)
                    );
                }
                None => {
                    let _ = writeln!(
                        s,
                        r#"<text x="{:.2}" y="{:.2}" font-size="9" text-anchor="middle">NA</text>"#,
                        x + bar_w * 0.45,
                        PLOT_BOTTOM - 4.0
                    );
                }
            }
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.1}" font-size="12" text-anchor="middle">{k} features</text>"#,
            gx + group_w * 0.4,
            PLOT_BOTTOM + 18.0
        );
    }
    for (i, &c) in classifiers.iter().enumerate() {
        let y = PLOT_TOP + 20.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<rect x="660" y="{y:.1}" width="12" height="12" fill="{}"/><text x="678" y="{:.1}" font-size="12">{}</text>"#,
            PALETTE[c as usize % PALETTE.len()],
            y + 10.0,
            escape(c.display_name())
        );
    }
    s.push_str("</svg>\n");
    s
}

/// TP, FP, FN and TN of the top-ranked cell as shares of the test rows.
pub fn confusion_svg(report: &GridReport) -> String {
    let top = report.top();
    let title = match top {
        Some(r) => format!("Confusion matrix: {} on set {}", r.classifier.display_name(), r.set_id),
        None => "Confusion matrix: no successful cell".to_string(),
    };
    let mut s = svg_open(&title, "Share of test rows (%)");
    let labels = ["TP", "FP", "FN", "TN"];
    let slot = (PLOT_RIGHT - PLOT_LEFT) / 4.0;
    let counts = top.and_then(|r| r.confusion).map(|c| [c.tp, c.fp, c.fn_, c.tn]);
    for (i, label) in labels.iter().enumerate() {
        let x = PLOT_LEFT + slot * i as f64 + slot * 0.2;
        match counts {
            Some(cs) => {
                let total: usize = cs.iter().sum();
                let pct = 100.0 * cs[i] as f64 / total.max(1) as f64;
                let y = y_at(pct);
                let _ = writeln!(
                    s,
                    r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}"><title>{label}: {} rows</title></rect>"#,
                    slot * 0.6,
                    PLOT_BOTTOM - y,
                    PALETTE[i],
                    cs[i]
                );
                let _ = writeln!(
                    s,
                    r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
                    x + slot * 0.3,
                    y - 4.0,
                    cs[i]
                );
            }
            None => {
                let _ = writeln!(
                    s,
                    r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">NA</text>"#,
                    x + slot * 0.3,
                    PLOT_BOTTOM - 4.0
                );
            }
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.1}" font-size="12" text-anchor="middle">{label}</text>"#,
            x + slot * 0.3,
            PLOT_BOTTOM + 18.0
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn selector_svg_name(selector: SelectorKind) -> String {
    format!("accuracy_{}.svg", selector.as_str())
}

pub const CONFUSION_SVG: &str = "confusion_top.svg";

fn write(dir: &Path, name: &str, text: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

/// Writes the requested formats into `dir` and returns the paths written.
pub fn emit_report(report: &GridReport, formats: &[ReportFormat], dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    if formats.is_empty() {
        return Ok(written);
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut formats = formats.to_vec();
    formats.sort_unstable();
    formats.dedup();
    for f in formats {
        match f {
            ReportFormat::Json => write(dir, "report.json", &report.to_json()?, &mut written)?,
            ReportFormat::Csv => write(dir, "report.csv", &to_csv(report)?, &mut written)?,
            ReportFormat::Markdown => write(dir, "report.md", &to_markdown(report), &mut written)?,
            ReportFormat::Svg => {
                for selector in selectors_in(report) {
                    write(dir, &selector_svg_name(selector), &selector_svg(report, selector), &mut written)?;
                }
                write(dir, CONFUSION_SVG, &confusion_svg(report), &mut written)?;
            }
        }
    }
    Ok(written)
}
