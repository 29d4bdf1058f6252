//! Tabular output with fixed precision, written atomically.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{Map, Number, Value};

use crate::config::OutputFormat;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
    /// Empty in CSV, `null` in JSON.
    Missing,
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
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

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Missing, Into::into)
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: OutputFormat, precision: usize) -> Result<Vec<u8>, CliError> {
        match format {
            OutputFormat::Csv => self.render_csv(precision),
            OutputFormat::Json => self.render_json(precision),
        }
    }

    fn render_csv(&self, precision: usize) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::Output(e.to_string());
        w.write_record(&self.columns).map_err(fail)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| csv_field(c, precision))).map_err(fail)?;
        }
        w.into_inner().map_err(|e| CliError::Output(e.to_string()))
    }

    fn render_json(&self, precision: usize) -> Result<Vec<u8>, CliError> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(k, c)| (k.to_string(), json_value(c, precision)))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut out = serde_json::to_vec_pretty(&rows).map_err(|e| CliError::Output(e.to_string()))?;
        out.push(b'\n');
        Ok(out)
    }
}

fn fixed(v: f64, precision: usize) -> String {
    let s = format!("{v:.precision$}");
    // Avoid "-0.000"; the sign carries no information once rounded away.
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn csv_field(c: &Cell, precision: usize) -> String {
    match c {
        Cell::Int(v) => v.to_string(),
        Cell::Float(v) if v.is_finite() => fixed(*v, precision),
        Cell::Float(_) | Cell::Missing => String::new(),
        Cell::Bool(b) => b.to_string(),
        Cell::Text(s) => s.clone(),
    }
}

fn json_value(c: &Cell, precision: usize) -> Value {
    match c {
        Cell::Int(v) => Value::from(*v),
        Cell::Float(v) => fixed(*v, precision)
            .parse::<f64>()
            .ok()
            .and_then(Number::from_f64)
            .map_or(Value::Null, Value::Number),
        Cell::Bool(b) => Value::Bool(*b),
        Cell::Text(s) => Value::String(s.clone()),
        Cell::Missing => Value::Null,
    }
}

/// Output directory plus format settings.
#[derive(Debug, Clone)]
pub struct Sink {
    pub directory: PathBuf,
    pub format: OutputFormat,
    pub precision: usize,
}

impl Sink {
    pub fn prepare(&self) -> Result<(), CliError> {
        fs::create_dir_all(&self.directory).map_err(|e| CliError::io(&self.directory, e))
    }

    /// Writes `table` as `<stem>.<ext>` and returns the path.
    pub fn table(&self, stem: &str, table: &Table) -> Result<PathBuf, CliError> {
        let path = self.directory.join(format!("{stem}.{}", self.format.extension()));
        write_atomic(&path, &table.render(self.format, self.precision)?)?;
        Ok(path)
    }

    pub fn raw(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.directory.join(name);
        write_atomic(&path, bytes)?;
        Ok(path)
    }
}

/// Writes to a sibling temp file, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.flush().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}
