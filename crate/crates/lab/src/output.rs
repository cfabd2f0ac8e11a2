//! Result envelope, CSV table and atomic file output.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::error::LabError;

/// Bumped whenever the envelope layout changes.
pub const ARTIFACT_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Number(f64),
    Integer(u64),
    Text(String),
    Flag(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Number(x) => csv_float(*x),
            Cell::Integer(n) => n.to_string(),
            Cell::Text(s) => csv_text(s),
            Cell::Flag(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Number(x)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Integer(n)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Flag(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn csv_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One named result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub name: String,
    pub value: Cell,
    pub units: String,
    pub method: String,
    /// Relative tolerance of a deterministic path.
    pub tolerance: Option<f64>,
    /// Standard error of a Monte Carlo path.
    pub std_error: Option<f64>,
}

impl Record {
    pub fn new(name: &str, value: impl Into<Cell>, units: &str, method: &str) -> Self {
        Self {
            name: name.to_string(),
            value: value.into(),
            units: units.to_string(),
            method: method.to_string(),
            tolerance: None,
            std_error: None,
        }
    }

    pub fn tolerance(mut self, tol: f64) -> Self {
        self.tolerance = Some(tol);
        self
    }

    pub fn std_error(mut self, se: f64) -> Self {
        self.std_error = Some(se);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    /// Columns given as `(name, unit)`; an empty unit means dimensionless.
    pub fn new(columns: &[(&str, &str)]) -> Self {
        Self {
            columns: columns
                .iter()
                .map(|(n, u)| Column {
                    name: n.to_string(),
                    unit: u.to_string(),
                })
                .collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let j = self.columns.iter().position(|c| c.name == name)?;
        Some(self.rows.iter().map(|r| &r[j]).collect())
    }

    pub fn to_csv(&self) -> String {
        let header: Vec<String> = self
            .columns
            .iter()
            .map(|c| {
                if c.unit.is_empty() {
                    c.name.clone()
                } else {
                    format!("{}[{}]", c.name, c.unit)
                }
            })
            .collect();
        let mut out = header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    /// Canonical config text; feeding it back reproduces the run.
    pub text: String,
    pub resolved: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultEnvelope {
    pub version: &'static str,
    pub subcommand: String,
    pub seed: u64,
    pub config: ConfigEcho,
    pub records: Vec<Record>,
    pub table: Table,
    /// Statistics were flagged unreliable (exit code 3).
    pub unreliable: bool,
    /// Seconds; only filled when requested so that reruns stay byte-identical.
    pub wall_time: Option<f64>,
}

impl ResultEnvelope {
    pub fn new(config: &RunConfig, records: Vec<Record>, table: Table) -> Self {
        Self {
            version: ARTIFACT_VERSION,
            subcommand: config.subcommand.to_string(),
            seed: config.seed,
            config: ConfigEcho {
                text: config.echo_text(),
                resolved: config.echo(),
            },
            records,
            table,
            unreliable: false,
            wall_time: None,
        }
    }

    pub fn record(&self, name: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.table.to_csv(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("envelope serializes");
                s.push('\n');
                s
            }
        }
    }
}

/// Write `contents` to `path` through a temporary file in the same
/// directory and a rename, so readers never see a truncated file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), LabError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let display = path.display().to_string();
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| LabError::io(&display, e))?;
    tmp.write_all(contents.as_bytes())
        .map_err(|e| LabError::io(&display, e))?;
    tmp.as_file().sync_all().map_err(|e| LabError::io(&display, e))?;
    tmp.persist(path).map_err(|e| LabError::io(&display, e.error))?;
    Ok(())
}
