//! Deterministic CSV and JSON emission.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::CliError;

pub const TOOL: &str = concat!("tfic ", env!("CARGO_PKG_VERSION"));

/// Fixed 17-significant-digit scientific notation; `-0` prints as `0`.
pub fn fmt_float(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

/// A table with its column schema, written as CSV or JSON.
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra `#` header lines (after the standard ones).
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
pub enum Cell {
    Int(i64),
    Float(f64),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as i64)
    }
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new(), notes: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn to_csv(&self, config: &RunConfig) -> Result<String, CliError> {
        let mut out = String::new();
        let _ = writeln!(out, "# {TOOL}");
        let _ = writeln!(out, "# command: {}", config.command.name());
        let _ = writeln!(out, "# config: {}", config_json(config)?);
        for note in &self.notes {
            let _ = writeln!(out, "# {note}");
        }
        let _ = writeln!(out, "# columns: {}", self.columns.join(","));
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Int(i) => i.to_string(),
                    Cell::Float(x) => fmt_float(*x),
                })
                .collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        Ok(out)
    }

    fn to_json(&self, config: &RunConfig) -> Result<String, CliError> {
        let rows: Vec<Vec<Value>> = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|c| match c {
                        Cell::Int(i) => json!(i),
                        Cell::Float(x) => json!(x),
                    })
                    .collect()
            })
            .collect();
        let doc = json!({
            "tool": TOOL,
            "command": config.command.name(),
            "config": config,
            "notes": self.notes,
            "columns": self.columns,
            "rows": rows,
        });
        to_pretty(&doc)
    }
}

fn config_json(config: &RunConfig) -> Result<String, CliError> {
    serde_json::to_string(config).map_err(|e| CliError::Numerical(format!("serializing config: {e}")))
}

pub fn to_pretty<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Numerical(format!("serializing output: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Collects written files for the final report.
pub struct Writer<'a> {
    config: &'a RunConfig,
    pub written: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    pub fn new(config: &'a RunConfig) -> Result<Self, CliError> {
        fs::create_dir_all(&config.output)
            .map_err(|e| CliError::Config(format!("--output {}: {e}", config.output.display())))?;
        Ok(Writer { config, written: Vec::new() })
    }

    /// Writes `stem.csv` or `stem.json` according to `--format`.
    pub fn table(&mut self, stem: &str, table: &Table) -> Result<(), CliError> {
        let (ext, body) = match self.config.format {
            Format::Csv => ("csv", table.to_csv(self.config)?),
            Format::Json => ("json", table.to_json(self.config)?),
        };
        self.raw(&format!("{stem}.{ext}"), &body)
    }

    /// Writes a JSON document with the standard header fields prepended.
    pub fn summary<T: Serialize>(&mut self, name: &str, body: &T) -> Result<(), CliError> {
        let mut doc = json!({
            "tool": TOOL,
            "command": self.config.command.name(),
            "config": self.config,
        });
        let extra = serde_json::to_value(body).map_err(|e| CliError::Numerical(format!("serializing summary: {e}")))?;
        if let (Value::Object(d), Value::Object(e)) = (&mut doc, extra) {
            d.extend(e);
        }
        self.raw(name, &to_pretty(&doc)?)
    }

    pub fn raw(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let path = self.config.output.join(name);
        write_file(&path, body)?;
        self.written.push(path);
        Ok(())
    }
}

pub fn write_file(path: &Path, body: &str) -> Result<(), CliError> {
    fs::write(path, body).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}
