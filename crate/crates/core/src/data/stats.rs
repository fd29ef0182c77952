use serde::{Deserialize, Serialize};

use super::column::{ColumnData, ColumnTable, Validity};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub row_count: usize,
    pub valid_count: usize,
    pub null_count: usize,
    pub nan_count: usize,
    pub inf_count: usize,
    /// Numerical columns with at least one valid value.
    pub min: Option<f64>,
    pub max: Option<f64>,
    /// Categorical, multi-categorical and text columns.
    pub distinct_count: Option<usize>,
    /// Vector columns.
    pub dimensionality: Option<usize>,
}

/// Validity partition plus range, cardinality or dimensionality depending on dtype.
pub fn column_stats(table: &ColumnTable, column: &str) -> Result<ColumnStats> {
    let col = table.column(column)?;
    let mut s = ColumnStats {
        row_count: table.row_count(),
        valid_count: 0,
        null_count: 0,
        nan_count: 0,
        inf_count: 0,
        min: None,
        max: None,
        distinct_count: None,
        dimensionality: None,
    };
    for v in col.validity() {
        match v {
            Validity::Valid => s.valid_count += 1,
            Validity::Null => s.null_count += 1,
            Validity::Nan => s.nan_count += 1,
            Validity::Inf => s.inf_count += 1,
        }
    }
    let valid = |i: &usize| col.validity()[*i] == Validity::Valid;
    match col.data() {
        ColumnData::Numerical(values) => {
            for i in (0..values.len()).filter(valid) {
                let v = values[i];
                s.min = Some(s.min.map_or(v, |m: f64| m.min(v)));
                s.max = Some(s.max.map_or(v, |m: f64| m.max(v)));
            }
        }
        ColumnData::Categorical { codes, dictionary } => {
            let mut seen = vec![false; dictionary.len()];
            for i in (0..codes.len()).filter(valid) {
                seen[codes[i] as usize] = true;
            }
            s.distinct_count = Some(seen.iter().filter(|b| **b).count());
        }
        ColumnData::MultiCategorical { lists, dictionary } => {
            let mut seen = vec![false; dictionary.len()];
            for i in (0..lists.len()).filter(valid) {
                for c in &lists[i] {
                    seen[*c as usize] = true;
                }
            }
            s.distinct_count = Some(seen.iter().filter(|b| **b).count());
        }
        ColumnData::Text(values) => {
            let set: std::collections::HashSet<&str> =
                (0..values.len()).filter(valid).map(|i| values[i].as_str()).collect();
            s.distinct_count = Some(set.len());
        }
        ColumnData::Vector { dim, .. } => s.dimensionality = Some(*dim),
    }
    Ok(s)
}
