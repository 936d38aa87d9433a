//! CSV and JSON writers.

use std::io::Write;

use serde_json::{json, Map, Value};

use crate::args::Format;
use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(usize),
    Num(f64),
    Text(String),
    Empty,
}

impl Cell {
    pub fn opt(v: Option<f64>) -> Cell {
        v.map_or(Cell::Empty, Cell::Num)
    }

    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => format_num(*x),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(_) | Cell::Empty => Value::Null,
            Cell::Text(s) => json!(s),
        }
    }
}

/// 17 significant digits.
pub fn format_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Table {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    fn json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let mut m = Map::new();
                    for (c, v) in self.columns.iter().zip(row) {
                        m.insert((*c).to_string(), v.json());
                    }
                    Value::Object(m)
                })
                .collect(),
        )
    }
}

/// A table plus the metadata carried by JSON records.
pub struct Document {
    pub method: String,
    pub tolerances: Value,
    pub table: Table,
    pub extra: Map<String, Value>,
}

impl Document {
    pub fn new(method: impl Into<String>, tolerances: Value, table: Table) -> Document {
        Document { method: method.into(), tolerances, table, extra: Map::new() }
    }

    pub fn with(mut self, key: &str, value: Value) -> Document {
        self.extra.insert(key.to_string(), value);
        self
    }

    pub fn render(&self, cfg: &RunConfig) -> Result<String, CliError> {
        match cfg.format {
            Format::Csv => Ok(self.table.to_csv()),
            Format::Json => {
                let mut m = Map::new();
                m.insert("command".into(), json!(cfg.command));
                m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
                m.insert("method".into(), json!(self.method));
                m.insert("tolerances".into(), self.tolerances.clone());
                m.insert("config".into(), serde_json::to_value(cfg).map_err(|e| CliError::Numeric(e.to_string()))?);
                for (k, v) in &self.extra {
                    m.insert(k.clone(), v.clone());
                }
                m.insert("columns".into(), json!(self.table.columns));
                m.insert("rows".into(), self.table.json_rows());
                let mut s = serde_json::to_string_pretty(&Value::Object(m)).map_err(|e| CliError::Numeric(e.to_string()))?;
                s.push('\n');
                Ok(s)
            }
        }
    }

    pub fn emit(&self, cfg: &RunConfig) -> Result<(), CliError> {
        let text = self.render(cfg)?;
        match &cfg.output {
            Some(path) => std::fs::write(path, text)?,
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                out.flush()?;
            }
        }
        Ok(())
    }
}
