use crate::data::{ColumnData, ColumnTable};
use crate::error::{Error, Result};

/// Rows whose text contains `query` case-insensitively, in row order, at most `limit`.
pub fn text_search(table: &ColumnTable, column: &str, query: &str, limit: usize) -> Result<Vec<u32>> {
    let col = table.column(column)?;
    if !matches!(col.data(), ColumnData::Text(_) | ColumnData::Categorical { .. }) {
        return Err(Error::Query(format!("text search needs a text or categorical column, {column} is {:?}", col.dtype())));
    }
    let needle = query.to_lowercase();
    let mut out = Vec::new();
    for row in 0..col.len() {
        if out.len() >= limit {
            break;
        }
        if col.str_value(row).is_some_and(|s| s.to_lowercase().contains(&needle)) {
            out.push(row as u32);
        }
    }
    Ok(out)
}
