//! Deterministic CSV / JSON-lines rendering.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), lines end in
//! `\n`, and every file starts with the resolved configuration.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use clap::ValueEnum;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    pub fn name(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    pub fn opt(x: Option<f64>) -> Cell {
        x.map_or(Cell::Empty, Cell::Float)
    }

    pub fn text(s: impl Into<String>) -> Cell {
        Cell::Text(s.into())
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::Float(x) => format_float(*x),
        Cell::Int(i) => i.to_string(),
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
    }
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn json_cell(c: &Cell) -> String {
    match c {
        Cell::Float(x) if x.is_finite() => format_float(*x),
        Cell::Float(_) | Cell::Empty => "null".to_string(),
        Cell::Int(i) => i.to_string(),
        Cell::Text(s) => json_string(s),
    }
}

fn json_object(pairs: &[(String, Cell)]) -> String {
    let body: Vec<String> = pairs.iter().map(|(k, v)| format!("{}:{}", json_string(k), json_cell(v))).collect();
    format!("{{{}}}", body.join(","))
}

/// A command's tabular result plus trailing diagnostics.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub footer: Vec<(String, Cell)>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), ..Default::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn footer(&mut self, key: &str, value: impl Into<Cell>) {
        self.footer.push((key.to_string(), value.into()));
    }
}

/// Render `header` (resolved config) and `table` in the given format.
pub fn render(header: &[(String, Cell)], table: &Table, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            for (k, v) in header {
                let _ = writeln!(out, "# {k} = {}", csv_cell(v));
            }
            out.push_str(&table.columns.join(","));
            out.push('\n');
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(csv_cell).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            for (k, v) in &table.footer {
                let _ = writeln!(out, "# {k} = {}", csv_cell(v));
            }
        }
        Format::Jsonl => {
            let _ = writeln!(out, "{{\"config\":{}}}", json_object(header));
            for row in &table.rows {
                let pairs: Vec<(String, Cell)> =
                    table.columns.iter().map(|c| c.to_string()).zip(row.iter().cloned()).collect();
                out.push_str(&json_object(&pairs));
                out.push('\n');
            }
            if !table.footer.is_empty() {
                let _ = writeln!(out, "{{\"footer\":{}}}", json_object(&table.footer));
            }
        }
    }
    out
}

/// Write to `path`, or stdout when absent.
pub fn emit(path: Option<&Path>, text: &str) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())?;
            lock.flush()
        }
    }
}
