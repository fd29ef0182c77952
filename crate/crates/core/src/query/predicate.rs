use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::Bitmask;
use crate::data::{ColumnData, ColumnTable, Validity};
use crate::error::{Error, Result};

/// Version of the JSON predicate encoding served by the API.
pub const PREDICATE_ENCODING_VERSION: u32 = 1;

/// Invalid-value class targeted by a validity predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvalidClass {
    Null,
    Nan,
    Inf,
}

impl InvalidClass {
    fn matches(self, v: Validity) -> bool {
        matches!(
            (self, v),
            (InvalidClass::Null, Validity::Null) | (InvalidClass::Nan, Validity::Nan) | (InvalidClass::Inf, Validity::Inf)
        )
    }
}

/// Row filter. The JSON form is a tagged union on `"type"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Predicate {
    Interval {
        column: String,
        lo: f64,
        hi: f64,
        #[serde(default = "yes")]
        lo_closed: bool,
        #[serde(default = "yes")]
        hi_closed: bool,
    },
    /// Categorical value membership by dictionary string; multi-categorical rows
    /// match when any element is in the set.
    Member { column: String, values: Vec<String> },
    /// Closed data-space rectangle over two numerical columns.
    Rect {
        x: String,
        y: String,
        x0: f64,
        x1: f64,
        y0: f64,
        y1: f64,
    },
    /// Even-odd point-in-polygon over two numerical columns.
    Polygon { x: String, y: String, points: Vec<[f64; 2]> },
    Validity { column: String, class: InvalidClass },
    And { of: Vec<Predicate> },
    Or { of: Vec<Predicate> },
    Not { of: Box<Predicate> },
}

fn yes() -> bool {
    true
}

impl Predicate {
    /// The empty conjunction, which matches every row.
    pub fn all() -> Self {
        Predicate::And { of: Vec::new() }
    }

    pub fn is_all(&self) -> bool {
        matches!(self, Predicate::And { of } if of.is_empty())
    }

    pub fn interval(column: impl Into<String>, lo: f64, hi: f64) -> Self {
        Predicate::Interval {
            column: column.into(),
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn member<S: Into<String>>(column: impl Into<String>, values: impl IntoIterator<Item = S>) -> Self {
        Predicate::Member {
            column: column.into(),
            values: values.into_iter().map(Into::into).collect(),
        }
    }

    pub fn validity(column: impl Into<String>, class: InvalidClass) -> Self {
        Predicate::Validity {
            column: column.into(),
            class,
        }
    }

    pub fn negate(p: Predicate) -> Self {
        Predicate::Not { of: Box::new(p) }
    }

    /// Checks structural invariants (interval order, polygon arity).
    pub fn validate(&self) -> Result<()> {
        match self {
            Predicate::Interval { lo, hi, .. } => {
                if !(lo <= hi) {
                    return Err(Error::Query(format!("interval requires lo <= hi, got [{lo}, {hi}]")));
                }
            }
            Predicate::Rect { x0, x1, y0, y1, .. } => {
                if !(x0 <= x1 && y0 <= y1) {
                    return Err(Error::Query("rect requires x0 <= x1 and y0 <= y1".into()));
                }
            }
            Predicate::Polygon { points, .. } => {
                if points.len() < 3 {
                    return Err(Error::Query("polygon requires at least 3 vertices".into()));
                }
                if points.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(Error::Query("polygon vertices must be finite".into()));
                }
            }
            Predicate::And { of } | Predicate::Or { of } => {
                for p in of {
                    p.validate()?;
                }
            }
            Predicate::Not { of } => of.validate()?,
            Predicate::Member { .. } | Predicate::Validity { .. } => {}
        }
        Ok(())
    }

    /// Column names referenced anywhere in the predicate.
    pub fn columns(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_columns(&mut out);
        out
    }

    fn collect_columns<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Predicate::Interval { column, .. } | Predicate::Member { column, .. } | Predicate::Validity { column, .. } => {
                out.push(column)
            }
            Predicate::Rect { x, y, .. } | Predicate::Polygon { x, y, .. } => {
                out.push(x);
                out.push(y);
            }
            Predicate::And { of } | Predicate::Or { of } => of.iter().for_each(|p| p.collect_columns(out)),
            Predicate::Not { of } => of.collect_columns(out),
        }
    }
}

/// Even-odd rule; points exactly on an edge may fall either way.
pub fn point_in_polygon(px: f64, py: f64, poly: &[[f64; 2]]) -> bool {
    let mut inside = false;
    let mut j = poly.len() - 1;
    for i in 0..poly.len() {
        let [xi, yi] = poly[i];
        let [xj, yj] = poly[j];
        if (yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

fn numerical<'a>(table: &'a ColumnTable, name: &str) -> Result<(&'a [f64], &'a [Validity])> {
    let col = table.column(name)?;
    match col.as_numerical() {
        Some(v) => Ok((v, col.validity())),
        None => Err(Error::Query(format!("column {name} is {:?}, expected numerical", col.dtype()))),
    }
}

/// Evaluates `predicate` over every row. Rows that are null, nan or inf in a referenced
/// column fail every non-validity leaf; `not` is plain boolean negation.
pub fn evaluate(table: &ColumnTable, predicate: &Predicate) -> Result<Bitmask> {
    predicate.validate()?;
    eval(table, predicate)
}

fn eval(table: &ColumnTable, predicate: &Predicate) -> Result<Bitmask> {
    let n = table.row_count();
    Ok(match predicate {
        Predicate::Interval {
            column,
            lo,
            hi,
            lo_closed,
            hi_closed,
        } => {
            let (values, validity) = numerical(table, column)?;
            let (lo, hi, lc, hc) = (*lo, *hi, *lo_closed, *hi_closed);
            Bitmask::from_fn(n, |i| {
                let v = values[i];
                validity[i] == Validity::Valid
                    && (if lc { v >= lo } else { v > lo })
                    && (if hc { v <= hi } else { v < hi })
            })
        }
        Predicate::Member { column, values } => {
            let col = table.column(column)?;
            let validity = col.validity();
            match col.data() {
                ColumnData::Categorical { codes, dictionary } => {
                    let wanted = code_set(dictionary, values);
                    Bitmask::from_fn(n, |i| validity[i] == Validity::Valid && wanted[codes[i] as usize])
                }
                ColumnData::MultiCategorical { lists, dictionary } => {
                    let wanted = code_set(dictionary, values);
                    Bitmask::from_fn(n, |i| {
                        validity[i] == Validity::Valid && lists[i].iter().any(|c| wanted[*c as usize])
                    })
                }
                ColumnData::Text(text) => {
                    let wanted: HashSet<&str> = values.iter().map(String::as_str).collect();
                    Bitmask::from_fn(n, |i| validity[i] == Validity::Valid && wanted.contains(text[i].as_str()))
                }
                _ => {
                    return Err(Error::Query(format!(
                        "member requires a categorical column, {column} is {:?}",
                        col.dtype()
                    )))
                }
            }
        }
        Predicate::Rect { x, y, x0, x1, y0, y1 } => {
            let (xs, xv) = numerical(table, x)?;
            let (ys, yv) = numerical(table, y)?;
            Bitmask::from_fn(n, |i| {
                xv[i] == Validity::Valid
                    && yv[i] == Validity::Valid
                    && xs[i] >= *x0
                    && xs[i] <= *x1
                    && ys[i] >= *y0
                    && ys[i] <= *y1
            })
        }
        Predicate::Polygon { x, y, points } => {
            let (xs, xv) = numerical(table, x)?;
            let (ys, yv) = numerical(table, y)?;
            let (mut bx0, mut bx1, mut by0, mut by1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
            for [px, py] in points {
                bx0 = bx0.min(*px);
                bx1 = bx1.max(*px);
                by0 = by0.min(*py);
                by1 = by1.max(*py);
            }
            Bitmask::from_fn(n, |i| {
                xv[i] == Validity::Valid
                    && yv[i] == Validity::Valid
                    && xs[i] >= bx0
                    && xs[i] <= bx1
                    && ys[i] >= by0
                    && ys[i] <= by1
                    && point_in_polygon(xs[i], ys[i], points)
            })
        }
        Predicate::Validity { column, class } => {
            let validity = table.column(column)?.validity();
            Bitmask::from_fn(n, |i| class.matches(validity[i]))
        }
        Predicate::And { of } => {
            let mut acc = Bitmask::ones(n);
            for p in of {
                acc.and_assign(&eval(table, p)?);
            }
            acc
        }
        Predicate::Or { of } => {
            let mut acc = Bitmask::zeros(n);
            for p in of {
                acc.or_assign(&eval(table, p)?);
            }
            acc
        }
        Predicate::Not { of } => !&eval(table, of)?,
    })
}

fn code_set(dictionary: &[String], values: &[String]) -> Vec<bool> {
    let wanted: HashSet<&str> = values.iter().map(String::as_str).collect();
    dictionary.iter().map(|d| wanted.contains(d.as_str())).collect()
}
