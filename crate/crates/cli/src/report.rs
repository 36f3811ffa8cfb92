//! Rendering benchmark reports as CSV and Markdown.

use std::fmt::Write as _;

use causal_ssl_core::bench::{BenchReport, MethodSummary};
use serde::Deserialize;

use crate::reference;

pub const CSV_HEADER: &str = "method,dataset,mean_acc,std_acc,runs,failures";

/// One parsed row of [`render_csv`] output.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct CsvRow {
    pub method: String,
    pub dataset: String,
    pub mean_acc: f64,
    pub std_acc: f64,
    pub runs: usize,
    pub failures: usize,
}

/// Full-precision CSV, so [`parse_csv`] recovers the values exactly.
pub fn render_csv(report: &BenchReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for e in &report.entries {
        writeln!(out, "{},{},{},{},{},{}", e.method, e.dataset, e.mean, e.std, e.runs, e.failures).unwrap();
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>, csv::Error> {
    csv::Reader::from_reader(text.as_bytes()).deserialize().collect()
}

/// Three decimals without the leading zero: `0.968` becomes `.968`.
pub fn fmt_acc(x: f64) -> String {
    let s = format!("{x:.3}");
    match s.strip_prefix("0.") {
        Some(rest) => format!(".{rest}"),
        None => s,
    }
}

fn cell(e: &MethodSummary) -> String {
    if e.runs == 0 {
        "n/a".into()
    } else if e.never_converged() {
        "-".into()
    } else {
        format!("{} ± {}", fmt_acc(e.mean), fmt_acc(e.std))
    }
}

fn display_name(method: &str) -> &str {
    causal_ssl_core::bench::Method::parse(method).map(|m| m.display_name()).unwrap_or(method)
}

/// Methods as rows, datasets as columns, both in order of first appearance.
///
/// When a dataset has published reference values, rows for the transductive
/// SVMs are appended from the static table and marked as not recomputed.
pub fn render_markdown(report: &BenchReport) -> String {
    let mut datasets: Vec<&str> = Vec::new();
    let mut methods: Vec<&str> = Vec::new();
    for e in &report.entries {
        if !datasets.contains(&e.dataset.as_str()) {
            datasets.push(&e.dataset);
        }
        if !methods.contains(&e.method.as_str()) {
            methods.push(&e.method);
        }
    }

    let mut out = String::from("| Method |");
    for d in &datasets {
        write!(out, " {d} |").unwrap();
    }
    out.push_str("\n|---|");
    out.push_str(&"---|".repeat(datasets.len()));
    out.push('\n');
    for m in &methods {
        write!(out, "| {} |", display_name(m)).unwrap();
        for d in &datasets {
            let c = report.entries.iter().find(|e| e.method == *m && e.dataset == *d).map(cell).unwrap_or_default();
            write!(out, " {c} |").unwrap();
        }
        out.push('\n');
    }

    if datasets.iter().any(|d| reference::dataset_key(d).is_some()) {
        for (key, label) in reference::EXTERNAL_ROWS {
            write!(out, "| {label} † |").unwrap();
            for d in &datasets {
                let c = match reference::lookup(key, d) {
                    Some(Some((m, s))) => format!("{} ± {}", fmt_acc(m), fmt_acc(s)),
                    Some(None) => "-".into(),
                    None => String::new(),
                };
                write!(out, " {c} |").unwrap();
            }
            out.push('\n');
        }
        out.push_str("\n† published reference values, not recomputed\n");
    }
    out
}
