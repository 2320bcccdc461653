use std::io::Write;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::OutFormat;

/// One table of results: a header row plus typed cells.
#[derive(Debug, Clone)]
pub struct Report {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, Copy)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Complex(Complex64),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
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

impl From<Complex64> for Cell {
    fn from(v: Complex64) -> Self {
        Cell::Complex(v)
    }
}

// 17 significant digits.
fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

impl Cell {
    fn to_csv(self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fmt_float(v),
            Cell::Complex(z) => {
                let sign = if z.im.is_sign_negative() { "-" } else { "+" };
                format!("{}{}{}i", fmt_float(z.re), sign, fmt_float(z.im.abs()))
            }
        }
    }

    fn to_json(self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) => json!(v),
            Cell::Complex(z) => json!({"re": z.re, "im": z.im}),
        }
    }
}

impl Report {
    pub fn new(columns: Vec<&'static str>) -> Report {
        Report {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn write(&self, format: OutFormat, out: &mut dyn Write) -> std::io::Result<()> {
        match format {
            OutFormat::Csv => {
                writeln!(out, "{}", self.columns.join(","))?;
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(|c| c.to_csv()).collect();
                    writeln!(out, "{}", cells.join(","))?;
                }
            }
            OutFormat::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let mut obj = serde_json::Map::new();
                        for (name, cell) in self.columns.iter().zip(row) {
                            obj.insert(name.to_string(), cell.to_json());
                        }
                        Value::Object(obj)
                    })
                    .collect();
                let doc = json!({"rows": rows});
                writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
            }
        }
        Ok(())
    }
}
