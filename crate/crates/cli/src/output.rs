//! Tabular results and their CSV / JSON serializations.

use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::format::{fmt_num, round_json};

/// One field of a result row.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Missing,
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
            Cell::Missing => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

/// Fixed-column table of results.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Seed and truncation settings a result depends on.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub poisson_tail_mass: f64,
    pub min_photon_truncation: usize,
}

impl Default for Provenance {
    fn default() -> Self {
        Self {
            seed: None,
            poisson_tail_mass: siftless_core::poisson::TAIL_MASS,
            min_photon_truncation: siftless_core::poisson::MIN_TRUNCATION,
        }
    }
}

/// Everything a command produces.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub params: Value,
    pub provenance: Provenance,
    /// Scalar results printed above the table (CSV comments) or as a JSON
    /// object.
    pub summary: Vec<(&'static str, Cell)>,
    pub table: Table,
    /// Structured data that only the JSON output carries.
    pub details: Option<Value>,
}

/// JSON envelope written by every command.
#[derive(Debug, Clone, Serialize)]
pub struct OutputEnvelope {
    pub command: String,
    pub version: String,
    pub params: Value,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Map::is_empty")]
    pub summary: Map<String, Value>,
    pub rows: Vec<Map<String, Value>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

impl Report {
    pub fn envelope(&self) -> OutputEnvelope {
        let rows = self
            .table
            .rows
            .iter()
            .map(|row| {
                self.table
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(k, c)| (k.to_string(), c.to_json()))
                    .collect()
            })
            .collect();
        OutputEnvelope {
            command: self.command.to_string(),
            version: siftless_core::VERSION.to_string(),
            params: self.params.clone(),
            provenance: self.provenance.clone(),
            summary: self
                .summary
                .iter()
                .map(|(k, c)| (k.to_string(), c.to_json()))
                .collect(),
            rows,
            details: self.details.clone(),
        }
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut value = serde_json::to_value(self.envelope()).map_err(std::io::Error::other)?;
        round_json(&mut value);
        serde_json::to_writer_pretty(&mut out, &value).map_err(std::io::Error::other)?;
        writeln!(out)
    }

    /// CSV with a header row; summary values become leading `# key=value`
    /// comment lines.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (key, cell) in &self.summary {
            writeln!(out, "# {key}={}", cell.to_csv())?;
        }
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(&self.table.columns)?;
        for row in &self.table.rows {
            writer.write_record(row.iter().map(Cell::to_csv))?;
        }
        writer.flush()
    }
}
