//! `report.json` and the plot-ready CSV tables.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use pshlab::suite::Check;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Pass,
    CheckFailure,
    ConfigError,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Pass => 0,
            RunStatus::CheckFailure => 1,
            RunStatus::ConfigError => 2,
        }
    }
}

/// A diagnostic table, written as `<name>.csv` with `comment` lines prefixed
/// by `#` above the header row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub comment: Vec<String>,
    pub columns: Vec<String>,
    #[serde(skip)]
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str], comment: &[&str]) -> Self {
        Table {
            name: name.into(),
            comment: comment.iter().map(|s| s.to_string()).collect(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Where a table went.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: usize,
    /// `None` when the table was empty and no file was written.
    pub file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Runtime {
    pub seconds: f64,
    pub jobs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub status: RunStatus,
    pub config_path: String,
    /// The parsed configuration, absent when it did not parse.
    pub config: Option<ExperimentConfig>,
    pub seed: u64,
    /// Experiment-specific results.
    pub results: serde_json::Value,
    /// Every checked number with its tolerance.
    pub checks: Vec<Check>,
    pub diagnostics: Vec<TableEntry>,
    pub runtime: Runtime,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Report {
    pub fn new(config_path: &Path, seed: u64) -> Self {
        Report {
            tool: "pshlab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            status: RunStatus::Pass,
            config_path: config_path.display().to_string(),
            config: None,
            seed,
            results: serde_json::Value::Null,
            checks: Vec::new(),
            diagnostics: Vec::new(),
            runtime: Runtime::default(),
            error: None,
        }
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn write_table(table: &Table, path: &Path) -> Result<(), CliError> {
    let mut out = BufWriter::new(File::create(path)?);
    for line in &table.comment {
        writeln!(out, "# {line}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one CSV per nonempty table into `dir`; empty tables are listed
/// with a note and no file.
pub fn emit_plot_data(tables: &[Table], dir: &Path) -> Result<Vec<TableEntry>, CliError> {
    let mut entries = Vec::new();
    for t in tables {
        let mut e =
            TableEntry { name: t.name.clone(), columns: t.columns.clone(), rows: t.rows.len(), file: None, note: None };
        if t.rows.is_empty() {
            e.note = Some("empty, no file written".into());
        } else {
            let file = format!("{}.csv", t.name);
            write_table(t, &dir.join(&file))?;
            e.file = Some(file);
        }
        entries.push(e);
    }
    Ok(entries)
}

pub fn write_report(report: &Report, dir: &Path) -> Result<(), CliError> {
    let out = BufWriter::new(File::create(dir.join("report.json"))?);
    serde_json::to_writer_pretty(out, report).map_err(|e| CliError::Io(e.into()))
}
