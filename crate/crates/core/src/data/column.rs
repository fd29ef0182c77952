use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Placeholder code stored for categorical rows that are not valid.
pub const NULL_CODE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DType {
    Numerical,
    Categorical,
    MultiCategorical,
    Text,
    Vector,
}

/// Per-row validity class. The classes are disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Validity {
    Valid,
    Null,
    Nan,
    Inf,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    /// Invalid rows hold NaN (null, nan) or a signed infinity (inf).
    Numerical(Vec<f64>),
    Categorical {
        codes: Vec<u32>,
        dictionary: Vec<String>,
    },
    MultiCategorical {
        lists: Vec<Vec<u32>>,
        dictionary: Vec<String>,
    },
    /// Null rows hold the empty string.
    Text(Vec<String>),
    /// Row-major `rows × dim`; null rows are zero-filled.
    Vector { dim: usize, values: Vec<f32> },
}

impl ColumnData {
    pub fn dtype(&self) -> DType {
        match self {
            ColumnData::Numerical(_) => DType::Numerical,
            ColumnData::Categorical { .. } => DType::Categorical,
            ColumnData::MultiCategorical { .. } => DType::MultiCategorical,
            ColumnData::Text(_) => DType::Text,
            ColumnData::Vector { .. } => DType::Vector,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ColumnData::Numerical(v) => v.len(),
            ColumnData::Categorical { codes, .. } => codes.len(),
            ColumnData::MultiCategorical { lists, .. } => lists.len(),
            ColumnData::Text(v) => v.len(),
            ColumnData::Vector { dim, values } => {
                if *dim == 0 {
                    0
                } else {
                    values.len() / dim
                }
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    name: String,
    data: ColumnData,
    validity: Vec<Validity>,
}

impl Column {
    pub fn new(name: impl Into<String>, data: ColumnData, validity: Vec<Validity>) -> Result<Self> {
        let name = name.into();
        if data.len() != validity.len() {
            return Err(Error::Schema(format!(
                "column {name}: {} values but {} validity flags",
                data.len(),
                validity.len()
            )));
        }
        match &data {
            ColumnData::Categorical { codes, dictionary } => {
                for (code, v) in codes.iter().zip(&validity) {
                    if *v == Validity::Valid && *code as usize >= dictionary.len() {
                        return Err(Error::Schema(format!("column {name}: code {code} out of range")));
                    }
                }
            }
            ColumnData::MultiCategorical { lists, dictionary } => {
                if lists.iter().flatten().any(|c| *c as usize >= dictionary.len()) {
                    return Err(Error::Schema(format!("column {name}: code out of range")));
                }
            }
            ColumnData::Vector { dim, .. } if *dim == 0 && !validity.is_empty() => {
                return Err(Error::Schema(format!("column {name}: vector dimensionality must be >= 1")));
            }
            _ => {}
        }
        Ok(Column { name, data, validity })
    }

    /// Numerical column from raw floats, classifying NaN and infinities.
    pub fn numerical(name: impl Into<String>, values: Vec<f64>) -> Self {
        let validity = values.iter().map(|v| classify_float(*v)).collect();
        Column {
            name: name.into(),
            data: ColumnData::Numerical(values),
            validity,
        }
    }

    /// Numerical column where `None` is null.
    pub fn numerical_opt(name: impl Into<String>, values: &[Option<f64>]) -> Self {
        let validity = values
            .iter()
            .map(|v| v.map_or(Validity::Null, classify_float))
            .collect();
        let values = values.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
        Column {
            name: name.into(),
            data: ColumnData::Numerical(values),
            validity,
        }
    }

    /// Categorical column from optional strings; dictionary in first-appearance order.
    pub fn categorical<S: AsRef<str>>(name: impl Into<String>, values: &[Option<S>]) -> Self {
        let mut dict = Dictionary::default();
        let mut codes = Vec::with_capacity(values.len());
        let mut validity = Vec::with_capacity(values.len());
        for v in values {
            match v {
                Some(s) if !s.as_ref().is_empty() => {
                    codes.push(dict.intern(s.as_ref()));
                    validity.push(Validity::Valid);
                }
                _ => {
                    codes.push(NULL_CODE);
                    validity.push(Validity::Null);
                }
            }
        }
        Column {
            name: name.into(),
            data: ColumnData::Categorical {
                codes,
                dictionary: dict.into_vec(),
            },
            validity,
        }
    }

    pub fn text<S: AsRef<str>>(name: impl Into<String>, values: &[Option<S>]) -> Self {
        let mut out = Vec::with_capacity(values.len());
        let mut validity = Vec::with_capacity(values.len());
        for v in values {
            match v {
                Some(s) if !s.as_ref().is_empty() => {
                    out.push(s.as_ref().to_string());
                    validity.push(Validity::Valid);
                }
                _ => {
                    out.push(String::new());
                    validity.push(Validity::Null);
                }
            }
        }
        Column {
            name: name.into(),
            data: ColumnData::Text(out),
            validity,
        }
    }

    pub fn multi_categorical<S: AsRef<str>>(name: impl Into<String>, values: &[Option<Vec<S>>]) -> Self {
        let mut dict = Dictionary::default();
        let mut lists = Vec::with_capacity(values.len());
        let mut validity = Vec::with_capacity(values.len());
        for v in values {
            match v {
                Some(items) => {
                    lists.push(items.iter().map(|s| dict.intern(s.as_ref())).collect());
                    validity.push(Validity::Valid);
                }
                None => {
                    lists.push(Vec::new());
                    validity.push(Validity::Null);
                }
            }
        }
        Column {
            name: name.into(),
            data: ColumnData::MultiCategorical {
                lists,
                dictionary: dict.into_vec(),
            },
            validity,
        }
    }

    /// Vector column; every `Some` row must have length `dim`.
    pub fn vector(name: impl Into<String>, dim: usize, rows: &[Option<Vec<f32>>]) -> Result<Self> {
        let name = name.into();
        let mut values = Vec::with_capacity(rows.len() * dim);
        let mut validity = Vec::with_capacity(rows.len());
        for (i, r) in rows.iter().enumerate() {
            match r {
                Some(v) if v.len() == dim => {
                    values.extend_from_slice(v);
                    validity.push(Validity::Valid);
                }
                Some(v) => {
                    return Err(Error::Schema(format!(
                        "column {name}: row {i} has dimensionality {} but expected {dim}",
                        v.len()
                    )))
                }
                None => {
                    values.extend(std::iter::repeat_n(0.0, dim));
                    validity.push(Validity::Null);
                }
            }
        }
        Column::new(name, ColumnData::Vector { dim, values }, validity)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dtype(&self) -> DType {
        self.data.dtype()
    }

    pub fn data(&self) -> &ColumnData {
        &self.data
    }

    pub fn validity(&self) -> &[Validity] {
        &self.validity
    }

    pub fn len(&self) -> usize {
        self.validity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.validity.is_empty()
    }

    pub fn is_valid(&self, row: usize) -> bool {
        self.validity[row] == Validity::Valid
    }

    pub fn as_numerical(&self) -> Option<&[f64]> {
        match &self.data {
            ColumnData::Numerical(v) => Some(v),
            _ => None,
        }
    }

    pub fn dictionary(&self) -> Option<&[String]> {
        match &self.data {
            ColumnData::Categorical { dictionary, .. } | ColumnData::MultiCategorical { dictionary, .. } => {
                Some(dictionary)
            }
            _ => None,
        }
    }

    /// String value of a categorical or text row, if valid.
    pub fn str_value(&self, row: usize) -> Option<&str> {
        if !self.is_valid(row) {
            return None;
        }
        match &self.data {
            ColumnData::Categorical { codes, dictionary } => Some(&dictionary[codes[row] as usize]),
            ColumnData::Text(v) => Some(&v[row]),
            _ => None,
        }
    }

    /// Vector slice of a row, if valid.
    pub fn vector_row(&self, row: usize) -> Option<&[f32]> {
        match &self.data {
            ColumnData::Vector { dim, values } if self.is_valid(row) => Some(&values[row * dim..(row + 1) * dim]),
            _ => None,
        }
    }

    pub(crate) fn take(&self, rows: &[usize]) -> Column {
        let validity = rows.iter().map(|&r| self.validity[r]).collect();
        let data = match &self.data {
            ColumnData::Numerical(v) => ColumnData::Numerical(rows.iter().map(|&r| v[r]).collect()),
            ColumnData::Categorical { codes, dictionary } => ColumnData::Categorical {
                codes: rows.iter().map(|&r| codes[r]).collect(),
                dictionary: dictionary.clone(),
            },
            ColumnData::MultiCategorical { lists, dictionary } => ColumnData::MultiCategorical {
                lists: rows.iter().map(|&r| lists[r].clone()).collect(),
                dictionary: dictionary.clone(),
            },
            ColumnData::Text(v) => ColumnData::Text(rows.iter().map(|&r| v[r].clone()).collect()),
            ColumnData::Vector { dim, values } => ColumnData::Vector {
                dim: *dim,
                values: rows
                    .iter()
                    .flat_map(|&r| values[r * dim..(r + 1) * dim].iter().copied())
                    .collect(),
            },
        };
        Column {
            name: self.name.clone(),
            data,
            validity,
        }
    }
}

pub(crate) fn classify_float(v: f64) -> Validity {
    if v.is_nan() {
        Validity::Nan
    } else if v.is_infinite() {
        Validity::Inf
    } else {
        Validity::Valid
    }
}

#[derive(Default)]
pub(crate) struct Dictionary {
    index: std::collections::HashMap<String, u32>,
    values: Vec<String>,
}

impl Dictionary {
    pub(crate) fn intern(&mut self, s: &str) -> u32 {
        if let Some(&c) = self.index.get(s) {
            return c;
        }
        let c = self.values.len() as u32;
        self.index.insert(s.to_string(), c);
        self.values.push(s.to_string());
        c
    }

    pub(crate) fn into_vec(self) -> Vec<String> {
        self.values
    }
}

/// Immutable columnar dataset. Row ids are the dense range `0..row_count` in ingestion order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ColumnTable {
    columns: Vec<Column>,
    row_count: usize,
}

impl ColumnTable {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        let row_count = columns.first().map_or(0, Column::len);
        Self::with_row_count(columns, row_count)
    }

    /// Like [`ColumnTable::new`], but keeps `row_count` when there are no columns.
    pub fn with_row_count(columns: Vec<Column>, row_count: usize) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for c in &columns {
            if c.len() != row_count {
                return Err(Error::Schema(format!(
                    "column {} has {} rows, expected {row_count}",
                    c.name,
                    c.len()
                )));
            }
            if !seen.insert(c.name.as_str()) {
                return Err(Error::Schema(format!("duplicate column name {}", c.name)));
            }
        }
        Ok(ColumnTable { columns, row_count })
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::NotFound(format!("column {name}")))
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.columns.iter().any(|c| c.name == name)
    }

    /// Returns a new table with `column` appended.
    pub fn with_column(&self, column: Column) -> Result<Self> {
        let mut columns = self.columns.clone();
        columns.push(column);
        Self::with_row_count(columns, self.row_count)
    }

    /// Rows of `rows` (in the given order) as a new table.
    pub fn take(&self, rows: &[usize]) -> Self {
        ColumnTable {
            columns: self.columns.iter().map(|c| c.take(rows)).collect(),
            row_count: rows.len(),
        }
    }

    /// 2D points from two numerical columns. Rows invalid in either column become `[NaN, NaN]`.
    pub fn points(&self, x: &str, y: &str) -> Result<Vec<[f64; 2]>> {
        let xc = self.column(x)?;
        let yc = self.column(y)?;
        let (Some(xs), Some(ys)) = (xc.as_numerical(), yc.as_numerical()) else {
            return Err(Error::Query(format!("{x} and {y} must be numerical")));
        };
        Ok((0..self.row_count)
            .map(|i| {
                if xc.is_valid(i) && yc.is_valid(i) {
                    [xs[i], ys[i]]
                } else {
                    [f64::NAN, f64::NAN]
                }
            })
            .collect())
    }

    /// Column-wise equality of values and validity; valid floats compare with relative tolerance.
    pub fn same_content(&self, other: &ColumnTable, rel_tol: f64) -> bool {
        if self.row_count != other.row_count || self.columns.len() != other.columns.len() {
            return false;
        }
        self.columns.iter().zip(&other.columns).all(|(a, b)| {
            a.name == b.name && a.validity == b.validity && same_data(a, b, rel_tol)
        })
    }
}

fn close(a: f64, b: f64, rel_tol: f64) -> bool {
    a == b || (a - b).abs() <= rel_tol * a.abs().max(b.abs())
}

fn same_data(a: &Column, b: &Column, rel_tol: f64) -> bool {
    let valid = |i: usize| a.validity[i] == Validity::Valid;
    match (&a.data, &b.data) {
        (ColumnData::Numerical(x), ColumnData::Numerical(y)) => (0..x.len()).all(|i| match a.validity[i] {
            Validity::Valid => close(x[i], y[i], rel_tol),
            Validity::Inf => x[i] == y[i],
            _ => true,
        }),
        (ColumnData::Categorical { .. }, ColumnData::Categorical { .. }) | (ColumnData::Text(_), ColumnData::Text(_)) => {
            (0..a.len()).all(|i| a.str_value(i) == b.str_value(i))
        }
        (
            ColumnData::MultiCategorical { lists: la, dictionary: da },
            ColumnData::MultiCategorical { lists: lb, dictionary: db },
        ) => (0..a.len()).all(|i| {
            !valid(i)
                || la[i].len() == lb[i].len()
                    && la[i].iter().zip(&lb[i]).all(|(x, y)| da[*x as usize] == db[*y as usize])
        }),
        (ColumnData::Vector { dim: d1, .. }, ColumnData::Vector { dim: d2, .. }) => {
            d1 == d2
                && (0..a.len()).all(|i| match (a.vector_row(i), b.vector_row(i)) {
                    (Some(x), Some(y)) => x.iter().zip(y).all(|(p, q)| close(*p as f64, *q as f64, rel_tol)),
                    (None, None) => true,
                    _ => false,
                })
        }
        _ => false,
    }
}
