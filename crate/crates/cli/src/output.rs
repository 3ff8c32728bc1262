//! Tabular output as CSV or JSON.
//!
//! Numbers are written in shortest round-trip form, so CSV and JSON carry
//! the same doubles. An infinite PELVE is `inf` in CSV; in JSON it is `null`
//! next to a `<column>_infinite: true` flag.

use pelve_core::PelveOutcome;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Empty,
    Text(String),
    Int(u64),
    Num(f64),
    Bool(bool),
    Pelve(PelveOutcome),
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<PelveOutcome> for Cell {
    fn from(o: PelveOutcome) -> Self {
        Cell::Pelve(o)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, columns: &[&'static str]) -> Self {
        Self {
            name,
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Shortest round-trip decimal, switching to exponent form for very large
/// or small magnitudes.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn csv_field(cell: &Cell) -> String {
    match cell {
        Cell::Empty => String::new(),
        Cell::Text(s) => s.clone(),
        Cell::Int(i) => i.to_string(),
        Cell::Num(x) => format_number(*x),
        Cell::Bool(b) => b.to_string(),
        Cell::Pelve(PelveOutcome::Finite(c)) => format_number(*c),
        Cell::Pelve(PelveOutcome::Infinite) => "inf".into(),
    }
}

fn write_csv(table: &Table, out: &mut String) {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(&table.columns).expect("in-memory write");
    for row in &table.rows {
        writer
            .write_record(row.iter().map(csv_field))
            .expect("in-memory write");
    }
    let bytes = writer.into_inner().expect("in-memory flush");
    out.push_str(&String::from_utf8(bytes).expect("utf-8 fields"));
}

fn json_number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn json_rows(table: &Table) -> Value {
    let rows = table
        .rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            for (col, cell) in table.columns.iter().zip(row) {
                let value = match cell {
                    Cell::Empty => Value::Null,
                    Cell::Text(s) => Value::String(s.clone()),
                    Cell::Int(i) => Value::from(*i),
                    Cell::Num(x) => json_number(*x),
                    Cell::Bool(b) => Value::Bool(*b),
                    Cell::Pelve(o) => o.finite().map_or(Value::Null, json_number),
                };
                obj.insert((*col).to_string(), value);
                if let Cell::Pelve(o) = cell {
                    obj.insert(
                        format!("{col}_infinite"),
                        Value::Bool(*o == PelveOutcome::Infinite),
                    );
                }
            }
            Value::Object(obj)
        })
        .collect();
    Value::Array(rows)
}

/// Renders tables. CSV separates several tables by a blank line; JSON is an
/// array of row objects for one table and an object keyed by table name for
/// several.
pub fn render(tables: &[Table], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            for (i, t) in tables.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                write_csv(t, &mut out);
            }
        }
        Format::Json => {
            let value = if let [single] = tables {
                json_rows(single)
            } else {
                Value::Object(
                    tables
                        .iter()
                        .map(|t| (t.name.to_string(), json_rows(t)))
                        .collect(),
                )
            };
            out = serde_json::to_string_pretty(&value).expect("serializable");
            out.push('\n');
        }
    }
    out
}
