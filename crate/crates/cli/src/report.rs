//! Report documents and their JSON and CSV encodings.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::config::{Format, RunConfig};
use crate::CliError;

pub const SCHEMA: &str = "modone/1";

/// Rows for CSV output. Every command that has a natural table fills one in.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn histogram(rows: &[(f64, f64, f64)]) -> Self {
        let mut t = Self::new(vec!["bin_lo", "bin_hi", "density"]);
        for &(lo, hi, d) in rows {
            t.push(vec![num(lo), num(hi), num(d)]);
        }
        t
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// Shortest decimal that reads back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub struct Outcome {
    pub results: Value,
    pub table: Option<Table>,
}

#[derive(Serialize)]
pub struct Timing {
    pub wall_seconds: f64,
    pub threads: usize,
}

#[derive(Serialize)]
pub struct Document<'a> {
    pub schema: &'static str,
    pub command: &'static str,
    pub config: &'a RunConfig,
    pub results: &'a Value,
    pub timing: Option<Timing>,
}

pub fn render(
    config: &RunConfig,
    outcome: &Outcome,
    format: Format,
    timing: Option<Timing>,
) -> Result<String, CliError> {
    match format {
        Format::Json => {
            let doc =
                Document { schema: SCHEMA, command: config.command.name(), config, results: &outcome.results, timing };
            let mut s = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Internal(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let table = outcome.table.as_ref().ok_or_else(|| {
                CliError::Input(format!("`{}` has no tabular output; use --out json", config.command.name()))
            })?;
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            let io = |e: csv::Error| CliError::Internal(e.to_string());
            w.write_record(&table.header).map_err(io)?;
            for row in &table.rows {
                w.write_record(row).map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
        }
    }
}

pub fn write(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}")))
        }
    }
}
