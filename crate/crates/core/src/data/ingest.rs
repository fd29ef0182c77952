use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::column::{ColumnTable, DType};
use super::infer::{build_column, infer_dtype, RawCell};
use super::parquet_io;
use crate::error::{Error, Position, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Parquet,
}

impl Format {
    /// Guesses the format from a file name extension.
    pub fn from_path(path: &std::path::Path) -> Option<Format> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "csv" | "tsv" | "txt" => Some(Format::Csv),
            "json" | "ndjson" | "jsonl" => Some(Format::Json),
            "parquet" | "pq" => Some(Format::Parquet),
            _ => None,
        }
    }
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" | "ndjson" | "jsonl" => Ok(Format::Json),
            "parquet" | "pq" => Ok(Format::Parquet),
            other => Err(Error::Param(format!("unknown format {other}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    /// CSV field delimiter.
    pub delimiter: u8,
    /// Forced dtypes by column name; other columns are inferred.
    pub type_hints: HashMap<String, DType>,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            delimiter: b',',
            type_hints: HashMap::new(),
        }
    }
}

/// Parses `source` into a typed table. Every input row becomes one table row, in order.
pub fn ingest(source: &[u8], format: Format, options: &IngestOptions) -> Result<ColumnTable> {
    let raw = match format {
        Format::Csv => read_csv(source, options.delimiter)?,
        Format::Json => read_json(source)?,
        Format::Parquet => parquet_io::read_raw(source)?,
    };
    raw.into_table(options)
}

/// Column-major raw cells with names in source order.
pub(crate) struct RawTable {
    pub names: Vec<String>,
    pub columns: Vec<Vec<RawCell>>,
    pub row_count: usize,
}

impl RawTable {
    fn into_table(self, options: &IngestOptions) -> Result<ColumnTable> {
        let columns = self
            .names
            .iter()
            .zip(&self.columns)
            .map(|(name, cells)| {
                let dtype = options
                    .type_hints
                    .get(name)
                    .copied()
                    .unwrap_or_else(|| infer_dtype(cells));
                build_column(name, cells, dtype)
            })
            .collect::<Result<Vec<_>>>()?;
        ColumnTable::with_row_count(columns, self.row_count)
    }
}

fn csv_position(e: &csv::Error) -> Position {
    match e.position() {
        Some(p) => Position::Row(p.record()),
        None => Position::Unknown,
    }
}

fn csv_cell(s: &str) -> RawCell {
    if s.is_empty() {
        return RawCell::Null;
    }
    // list-valued cells are written as JSON arrays
    if s.starts_with('[') && s.ends_with(']') {
        if let Ok(serde_json::Value::Array(items)) = serde_json::from_str::<serde_json::Value>(s) {
            return RawCell::List(items.into_iter().map(json_cell).collect());
        }
    }
    RawCell::Str(s.to_string())
}

fn read_csv(source: &[u8], delimiter: u8) -> Result<RawTable> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .flexible(false)
        .from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| Error::ingest(csv_position(&e), e.to_string()))?
        .clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::ingest(Position::Row(0), "missing header row"));
    }
    let names: Vec<String> = headers.iter().map(|h| h.trim().to_string()).collect();
    check_names(&names)?;
    let mut columns: Vec<Vec<RawCell>> = vec![Vec::new(); names.len()];
    let mut row_count = 0;
    for record in reader.records() {
        let record = record.map_err(|e| Error::ingest(csv_position(&e), e.to_string()))?;
        for (col, field) in columns.iter_mut().zip(record.iter()) {
            col.push(csv_cell(field));
        }
        row_count += 1;
    }
    Ok(RawTable {
        names,
        columns,
        row_count,
    })
}

fn check_names(names: &[String]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for n in names {
        if n.is_empty() {
            return Err(Error::ingest(Position::Row(0), "empty column name in header"));
        }
        if !seen.insert(n) {
            return Err(Error::ingest(Position::Row(0), format!("duplicate column name {n}")));
        }
    }
    Ok(())
}

pub(crate) fn json_cell(v: serde_json::Value) -> RawCell {
    use serde_json::Value;
    match v {
        Value::Null => RawCell::Null,
        Value::Bool(b) => RawCell::Str(b.to_string()),
        Value::Number(n) => RawCell::Num(n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) => RawCell::Str(s),
        Value::Array(items) => RawCell::List(
            items
                .into_iter()
                .map(|i| match i {
                    Value::Array(_) | Value::Object(_) => RawCell::Str(i.to_string()),
                    other => json_cell(other),
                })
                .collect(),
        ),
        Value::Object(_) => RawCell::Str(v.to_string()),
    }
}

/// Accepts either a top-level array of objects or newline-delimited objects.
/// The schema is the union of keys in first-appearance order; missing keys are null.
fn read_json(source: &[u8]) -> Result<RawTable> {
    let text = std::str::from_utf8(source).map_err(|e| Error::ingest(Position::Byte(e.valid_up_to() as u64), "invalid UTF-8"))?;
    let trimmed = text.trim_start();
    let mut objects = Vec::new();
    if trimmed.starts_with('[') {
        let values: Vec<serde_json::Value> = serde_json::from_str(text).map_err(|e| {
            Error::ingest(Position::Row(e.line() as u64), e.to_string())
        })?;
        for (i, v) in values.into_iter().enumerate() {
            match v {
                serde_json::Value::Object(m) => objects.push(m),
                _ => return Err(Error::ingest(Position::Row(i as u64 + 1), "array element is not an object")),
            }
        }
    } else {
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row = Position::Row(i as u64 + 1);
            match serde_json::from_str::<serde_json::Value>(line) {
                Ok(serde_json::Value::Object(m)) => objects.push(m),
                Ok(_) => return Err(Error::ingest(row, "line is not a JSON object")),
                Err(e) => return Err(Error::ingest(row, e.to_string())),
            }
        }
    }
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for m in &objects {
        for k in m.keys() {
            if !index.contains_key(k) {
                index.insert(k.clone(), names.len());
                names.push(k.clone());
            }
        }
    }
    let row_count = objects.len();
    let mut columns: Vec<Vec<RawCell>> = vec![vec![RawCell::Null; row_count]; names.len()];
    for (row, m) in objects.into_iter().enumerate() {
        for (k, v) in m {
            columns[index[&k]][row] = json_cell(v);
        }
    }
    Ok(RawTable {
        names,
        columns,
        row_count,
    })
}
