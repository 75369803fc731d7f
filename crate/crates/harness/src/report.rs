//! CSV and JSON emission. Numbers use Rust's shortest round-trip
//! formatting, so identical inputs give byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{ExperimentConfig, Format};
use crate::sweep::StatReport;
use crate::HarnessError;

pub const SCHEMA: &str = "mie-report/1";
pub const CSV_COLUMNS: [&str; 10] = [
    "zeta", "g", "n", "engine", "kappa1", "kappa2", "kappa3", "err1", "err2", "err3",
];

fn field(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn to_csv(reports: &[StatReport]) -> String {
    let mut out = format!("# schema: {SCHEMA}\n{}\n", CSV_COLUMNS.join(","));
    for r in reports {
        for row in &r.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.zeta,
                r.g,
                row.n,
                row.engine,
                field(row.kappa[0]),
                field(row.kappa[1]),
                field(row.kappa[2]),
                field(row.err[0]),
                field(row.err[1]),
                field(row.err[2]),
            );
        }
    }
    out
}

#[derive(Serialize)]
struct Document<'a> {
    schema: &'a str,
    version: &'a str,
    seed: u64,
    config: &'a ExperimentConfig,
    reports: &'a [StatReport],
}

pub fn to_json(config: &ExperimentConfig, reports: &[StatReport]) -> String {
    let doc = Document {
        schema: SCHEMA,
        version: env!("CARGO_PKG_VERSION"),
        seed: config.seed,
        config,
        reports,
    };
    serde_json::to_string_pretty(&doc).expect("reports serialise") + "\n"
}

/// Writes `<stem>.csv` and/or `<stem>.json` into `dir`; both when `format`
/// is `None`.
pub fn emit_report(
    dir: &Path,
    stem: &str,
    config: &ExperimentConfig,
    reports: &[StatReport],
    format: Option<Format>,
) -> Result<Vec<PathBuf>, HarnessError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if format != Some(Format::Json) {
        let path = dir.join(format!("{stem}.csv"));
        std::fs::write(&path, to_csv(reports))?;
        written.push(path);
    }
    if format != Some(Format::Csv) {
        let path = dir.join(format!("{stem}.json"));
        std::fs::write(&path, to_json(config, reports))?;
        written.push(path);
    }
    Ok(written)
}
