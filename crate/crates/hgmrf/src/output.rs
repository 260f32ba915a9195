//! Tabular CSV and JSON output.
//!
//! CSV uses `,` separators, LF line endings and a header row. Reals are
//! written in the shortest form that parses back to the same `f64`, which
//! does not depend on the locale.

use std::io::Write;

use hgmrf_core::experiments::{ExperimentOutput, SweepResult};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;
use crate::params::Params;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Real(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Real(x) => format_real(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Real(x) if x.is_finite() => Value::from(*x),
            Cell::Real(_) => Value::Null,
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as u64)
    }
}

impl From<u64> for Cell {
    fn from(i: u64) -> Self {
        Cell::Int(i)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

/// Shortest round-trip decimal form of `x`.
pub fn format_real(x: f64) -> String {
    format!("{x:?}")
}

/// Named columns and rows of cells.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    /// A single-row table from `(column, value)` pairs.
    pub fn row(pairs: Vec<(&str, Cell)>) -> Self {
        let (columns, row): (Vec<_>, Vec<_>) =
            pairs.into_iter().map(|(k, v)| (k.to_string(), v)).unzip();
        Self {
            columns,
            rows: vec![row],
        }
    }

    pub fn from_sweep(sweep: &SweepResult) -> Self {
        let mut columns = vec![sweep.parameter_name.clone()];
        columns.extend(sweep.columns.iter().cloned());
        let rows = sweep
            .rows
            .iter()
            .map(|r| {
                std::iter::once(Cell::Real(r.parameter))
                    .chain(r.values.iter().map(|&v| Cell::Real(v)))
                    .collect()
            })
            .collect();
        Self { columns, rows }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv))?;
        }
        w.flush()?;
        Ok(())
    }

    fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .cloned()
                        .zip(row.iter().map(Cell::to_json))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// JSON document: the effective parameters at top level, so the document
/// can be fed back as a configuration, plus the command's results.
pub fn json_document(
    command: &str,
    kind: Option<&str>,
    params: &Params,
    results: Vec<(&str, Value)>,
) -> Result<Value, CliError> {
    let Value::Object(mut doc) = serde_json::to_value(params)? else {
        unreachable!("parameters serialize to an object");
    };
    doc.insert("command".into(), command.into());
    if let Some(kind) = kind {
        doc.insert("kind".into(), kind.into());
    }
    for (key, value) in results {
        doc.insert(key.into(), value);
    }
    Ok(Value::Object(doc))
}

pub fn table_json(table: &Table) -> Value {
    table.to_json()
}

/// Fits, trends, summary and notes of an experiment.
pub fn experiment_results(out: &ExperimentOutput) -> Result<Vec<(&'static str, Value)>, CliError> {
    Ok(vec![
        ("fits", serde_json::to_value(&out.fits)?),
        ("trends", serde_json::to_value(&out.trends)?),
        ("summary", serde_json::to_value(&out.summary)?),
        ("notes", serde_json::to_value(&out.notes)?),
    ])
}

pub fn write_json<W: Write>(value: &Value, mut out: W) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}
