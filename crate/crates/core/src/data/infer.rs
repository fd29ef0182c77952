//! Schema inference over raw cells coming from any input format.

use std::collections::HashSet;

use super::column::{Column, ColumnData, DType, Dictionary, Validity, NULL_CODE};
use crate::error::{Error, Result};

/// Minimum distinct-value budget for a string column to stay categorical.
pub const CATEGORICAL_MIN_DISTINCT: usize = 50;
/// Fraction of the row count allowed as distinct values for a categorical column.
pub const CATEGORICAL_DISTINCT_FRACTION: f64 = 0.5;

/// A cell as read from the source, before typing.
#[derive(Debug, Clone, PartialEq)]
pub enum RawCell {
    Null,
    Str(String),
    Num(f64),
    List(Vec<RawCell>),
}

/// Outcome of parsing one textual numeric cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParsedNumber {
    Null,
    Value(f64),
    Nan,
    Inf(f64),
    NotANumber,
}

/// Accepts integers, decimals and scientific notation; `nan`, `inf`, `-inf`,
/// `Infinity` (any case) map to their invalid classes and the empty string to null.
pub fn parse_number(s: &str) -> ParsedNumber {
    let t = s.trim();
    if t.is_empty() {
        return ParsedNumber::Null;
    }
    let (sign, body) = match t.as_bytes()[0] {
        b'-' => (-1.0, &t[1..]),
        b'+' => (1.0, &t[1..]),
        _ => (1.0, t),
    };
    if body.eq_ignore_ascii_case("nan") {
        return ParsedNumber::Nan;
    }
    if body.eq_ignore_ascii_case("inf") || body.eq_ignore_ascii_case("infinity") {
        return ParsedNumber::Inf(sign * f64::INFINITY);
    }
    // f64::from_str also accepts spellings like "infinity" which are handled above;
    // anything left must start with a digit or a dot.
    if !body.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
        return ParsedNumber::NotANumber;
    }
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => ParsedNumber::Value(v),
        // overflow such as "1e999"
        Ok(v) => ParsedNumber::Inf(v),
        Err(_) => ParsedNumber::NotANumber,
    }
}

fn cell_number(c: &RawCell) -> ParsedNumber {
    match c {
        RawCell::Null => ParsedNumber::Null,
        RawCell::Num(v) if v.is_nan() => ParsedNumber::Nan,
        RawCell::Num(v) if v.is_infinite() => ParsedNumber::Inf(*v),
        RawCell::Num(v) => ParsedNumber::Value(*v),
        RawCell::Str(s) => parse_number(s),
        RawCell::List(_) => ParsedNumber::NotANumber,
    }
}

fn cell_string(c: &RawCell) -> Option<String> {
    match c {
        RawCell::Null => None,
        RawCell::Str(s) if s.is_empty() => None,
        RawCell::Str(s) => Some(s.clone()),
        RawCell::Num(v) => Some(format_number(*v)),
        RawCell::List(items) => Some(
            serde_json::Value::Array(items.iter().map(raw_to_json).collect()).to_string(),
        ),
    }
}

fn raw_to_json(c: &RawCell) -> serde_json::Value {
    match c {
        RawCell::Null => serde_json::Value::Null,
        RawCell::Str(s) => serde_json::Value::String(s.clone()),
        RawCell::Num(v) => serde_json::Number::from_f64(*v)
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null),
        RawCell::List(items) => serde_json::Value::Array(items.iter().map(raw_to_json).collect()),
    }
}

/// Shortest text that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

fn is_null(c: &RawCell) -> bool {
    match c {
        RawCell::Null => true,
        RawCell::Str(s) => s.trim().is_empty(),
        _ => false,
    }
}

/// Infers the dtype of a column from all of its cells.
///
/// Rules, in order: any list cell makes the column list-typed (vector when every
/// list is a non-empty list of numbers, multi-categorical otherwise); numerical when
/// every non-null cell parses as a number; categorical when the number of distinct
/// strings is at most `max(50, 0.5·rows)`; text otherwise.
pub fn infer_dtype(cells: &[RawCell]) -> DType {
    let mut any_list = false;
    let mut all_lists = true;
    let mut all_numeric_lists = true;
    let mut all_numbers = true;
    for c in cells.iter().filter(|c| !is_null(c)) {
        match c {
            RawCell::List(items) => {
                any_list = true;
                if items.is_empty() || !items.iter().all(|i| matches!(i, RawCell::Num(_))) {
                    all_numeric_lists = false;
                }
            }
            other => {
                all_lists = false;
                if matches!(cell_number(other), ParsedNumber::NotANumber) {
                    all_numbers = false;
                }
            }
        }
    }
    if any_list {
        return if all_lists && all_numeric_lists {
            DType::Vector
        } else {
            DType::MultiCategorical
        };
    }
    if all_numbers {
        return DType::Numerical;
    }
    let distinct: HashSet<String> = cells.iter().filter_map(cell_string).collect();
    let budget = (CATEGORICAL_DISTINCT_FRACTION * cells.len() as f64).max(CATEGORICAL_MIN_DISTINCT as f64);
    if distinct.len() as f64 <= budget {
        DType::Categorical
    } else {
        DType::Text
    }
}

/// Builds a typed column from raw cells. Cells that do not fit `dtype` become null,
/// except mixed vector dimensionality which is a schema error.
pub fn build_column(name: &str, cells: &[RawCell], dtype: DType) -> Result<Column> {
    let n = cells.len();
    let mut validity = Vec::with_capacity(n);
    let data = match dtype {
        DType::Numerical => {
            let mut values = Vec::with_capacity(n);
            for c in cells {
                let (v, class) = match cell_number(c) {
                    ParsedNumber::Value(v) => (v, Validity::Valid),
                    ParsedNumber::Nan => (f64::NAN, Validity::Nan),
                    ParsedNumber::Inf(v) => (v, Validity::Inf),
                    ParsedNumber::Null | ParsedNumber::NotANumber => (f64::NAN, Validity::Null),
                };
                values.push(v);
                validity.push(class);
            }
            ColumnData::Numerical(values)
        }
        DType::Categorical => {
            let mut dict = Dictionary::default();
            let codes = cells
                .iter()
                .map(|c| match cell_string(c) {
                    Some(s) => {
                        validity.push(Validity::Valid);
                        dict.intern(&s)
                    }
                    None => {
                        validity.push(Validity::Null);
                        NULL_CODE
                    }
                })
                .collect();
            ColumnData::Categorical {
                codes,
                dictionary: dict.into_vec(),
            }
        }
        DType::Text => {
            let values = cells
                .iter()
                .map(|c| match cell_string(c) {
                    Some(s) => {
                        validity.push(Validity::Valid);
                        s
                    }
                    None => {
                        validity.push(Validity::Null);
                        String::new()
                    }
                })
                .collect();
            ColumnData::Text(values)
        }
        DType::MultiCategorical => {
            let mut dict = Dictionary::default();
            let lists = cells
                .iter()
                .map(|c| match c {
                    RawCell::List(items) => {
                        validity.push(Validity::Valid);
                        items
                            .iter()
                            .filter_map(cell_string)
                            .map(|s| dict.intern(&s))
                            .collect()
                    }
                    other => match cell_string(other) {
                        Some(s) => {
                            validity.push(Validity::Valid);
                            vec![dict.intern(&s)]
                        }
                        None => {
                            validity.push(Validity::Null);
                            Vec::new()
                        }
                    },
                })
                .collect();
            ColumnData::MultiCategorical {
                lists,
                dictionary: dict.into_vec(),
            }
        }
        DType::Vector => {
            let mut dim = None;
            for (row, c) in cells.iter().enumerate() {
                if let RawCell::List(items) = c {
                    match dim {
                        None => dim = Some(items.len()),
                        Some(d) if d != items.len() => {
                            return Err(Error::Schema(format!(
                                "column {name}: row {row} has dimensionality {} but expected {d}",
                                items.len()
                            )))
                        }
                        _ => {}
                    }
                }
            }
            let dim = dim.unwrap_or(1);
            if dim == 0 {
                return Err(Error::Schema(format!("column {name}: empty vectors")));
            }
            let mut values = Vec::with_capacity(n * dim);
            for c in cells {
                match c {
                    RawCell::List(items) => {
                        validity.push(Validity::Valid);
                        values.extend(items.iter().map(|i| match cell_number(i) {
                            ParsedNumber::Value(v) | ParsedNumber::Inf(v) => v as f32,
                            _ => f32::NAN,
                        }));
                    }
                    _ => {
                        validity.push(Validity::Null);
                        values.extend(std::iter::repeat_n(0.0f32, dim));
                    }
                }
            }
            ColumnData::Vector { dim, values }
        }
    };
    Column::new(name, data, validity)
}
