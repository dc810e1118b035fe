//! Tabular results and their CSV / JSON encodings.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::SimError;
use crate::spec::{ExperimentSpec, OutputFormat};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => v.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Num(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Num(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }
}

/// Rows under a fixed header.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// Values of column `name` in row order.
    pub fn values(&self, name: &str) -> Vec<&Cell> {
        let i = self.column(name).expect("unknown column");
        self.rows.iter().map(|r| &r[i]).collect()
    }
}

fn label(spec: &ExperimentSpec) -> String {
    format!(
        "leakbf {} recipe={}",
        env!("CARGO_PKG_VERSION"),
        spec.recipe.map_or("none", |r| r.name())
    )
}

/// CSV with the resolved config in leading `#!` lines.
pub fn to_csv(spec: &ExperimentSpec, table: &Table) -> String {
    let mut out = String::new();
    writeln!(out, "# {}", label(spec)).unwrap();
    for line in spec.to_config_text().lines() {
        writeln!(out, "#! {line}").unwrap();
    }
    writeln!(out, "{}", table.columns.join(",")).unwrap();
    for row in &table.rows {
        writeln!(out, "{}", row.iter().map(Cell::csv).collect::<Vec<_>>().join(",")).unwrap();
    }
    out
}

/// JSON records plus a metadata object holding the resolved config.
pub fn to_json(spec: &ExperimentSpec, table: &Table) -> String {
    let records: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let mut m = Map::new();
            for (c, v) in table.columns.iter().zip(row) {
                m.insert(c.to_string(), v.json());
            }
            Value::Object(m)
        })
        .collect();
    let doc = json!({
        "metadata": {
            "generator": label(spec),
            "recipe": spec.recipe.map(|r| r.name()),
            "seed": spec.config.seed,
            "config": spec.to_config_text(),
            "columns": table.columns,
        },
        "rows": records,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("JSON encoding cannot fail");
    s.push('\n');
    s
}

pub fn render(spec: &ExperimentSpec, table: &Table) -> String {
    match spec.output_format {
        OutputFormat::Csv => to_csv(spec, table),
        OutputFormat::Json => to_json(spec, table),
    }
}

/// Write to `spec.output_path`, or to stdout when unset.
pub fn emit(spec: &ExperimentSpec, table: &Table) -> Result<(), SimError> {
    let text = render(spec, table);
    match &spec.output_path {
        Some(path) => write_file(path, &text),
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), SimError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}
