//! Typed columnar storage, ingest from CSV/JSON/Parquet and selection export.

mod column;
mod export;
mod infer;
mod ingest;
mod parquet_io;
mod stats;

pub use column::{Column, ColumnData, ColumnTable, DType, Validity, NULL_CODE};
pub use export::{export, export_to, ExportFormat};
pub use infer::{build_column, format_number, infer_dtype, parse_number, ParsedNumber, RawCell};
pub use ingest::{ingest, Format, IngestOptions};
pub use stats::{column_stats, ColumnStats};
