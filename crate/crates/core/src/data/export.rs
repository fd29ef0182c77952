use std::io::Write;

use super::column::{ColumnData, ColumnTable, Validity};
use super::infer::format_number;
use super::parquet_io;
use crate::error::{Error, Result};
use crate::query::Bitmask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Csv,
    Parquet,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ExportFormat::Csv),
            "parquet" | "pq" => Ok(ExportFormat::Parquet),
            other => Err(Error::Param(format!("unknown export format {other}"))),
        }
    }
}

/// Serializes the rows selected by `mask` in their original order and column order.
pub fn export(table: &ColumnTable, mask: &Bitmask, format: ExportFormat) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    export_to(table, mask, format, &mut out)?;
    Ok(out)
}

pub fn export_to<W: Write + Send>(table: &ColumnTable, mask: &Bitmask, format: ExportFormat, sink: W) -> Result<()> {
    if mask.len() != table.row_count() {
        return Err(Error::Param(format!(
            "mask has {} bits but table has {} rows",
            mask.len(),
            table.row_count()
        )));
    }
    let rows: Vec<usize> = mask.iter_ones().collect();
    match format {
        ExportFormat::Csv => write_csv(table, &rows, sink),
        ExportFormat::Parquet => parquet_io::write(table, &rows, sink),
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

fn write_csv<W: Write>(table: &ColumnTable, rows: &[usize], sink: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(sink);
    w.write_record(table.columns().iter().map(|c| c.name())).map_err(csv_err)?;
    let mut record: Vec<String> = Vec::with_capacity(table.columns().len());
    for &r in rows {
        record.clear();
        for col in table.columns() {
            let v = col.validity()[r];
            let cell = match col.data() {
                ColumnData::Numerical(values) => match v {
                    Validity::Null => String::new(),
                    _ => format_number(values[r]),
                },
                ColumnData::Categorical { .. } | ColumnData::Text(_) => col.str_value(r).unwrap_or("").to_string(),
                ColumnData::MultiCategorical { lists, dictionary } => {
                    if v == Validity::Valid {
                        serde_json::to_string(&lists[r].iter().map(|c| &dictionary[*c as usize]).collect::<Vec<_>>())
                            .expect("string list serializes")
                    } else {
                        String::new()
                    }
                }
                ColumnData::Vector { .. } => match col.vector_row(r) {
                    Some(x) => {
                        let parts: Vec<String> = x.iter().map(|f| format!("{f:?}")).collect();
                        format!("[{}]", parts.join(","))
                    }
                    None => String::new(),
                },
            };
            record.push(cell);
        }
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
