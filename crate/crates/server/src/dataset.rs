//! Column roles and the preparation step that guarantees a 2D position per row.

use atlas_core::data::{ColumnTable, DType};
use atlas_core::projection::{embed_column, pca_2d, DEFAULT_HASH_DIM};
use atlas_core::{Error, Result};
use serde::{Deserialize, Serialize};

pub const PROJECTION_X: &str = "projection_x";
pub const PROJECTION_Y: &str = "projection_y";
/// Vector column added when only a text column is available.
pub const HASHED_EMBEDDING: &str = "embedding";

/// Which columns play which role. After [`prepare`], `x` and `y` always name
/// numerical columns of the table.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub x: Option<String>,
    pub y: Option<String>,
    pub vector: Option<String>,
    pub text: Option<String>,
    pub category: Option<String>,
}

/// A table whose column roles have resolved coordinates.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub table: ColumnTable,
    pub spec: DatasetSpec,
    pub x: String,
    pub y: String,
}

fn require(table: &ColumnTable, name: &str, want: &[DType], role: &str) -> Result<()> {
    let dtype = table.column(name)?.dtype();
    if want.contains(&dtype) {
        Ok(())
    } else {
        Err(Error::Schema(format!("{role} column {name} is {dtype:?}, expected one of {want:?}")))
    }
}

/// Checks the roles and fills in coordinates. Without `x`/`y`, the vector column
/// (or a hashed embedding of the text column) is projected to 2D by PCA into
/// `projection_x` and `projection_y`.
pub fn prepare(table: ColumnTable, mut spec: DatasetSpec) -> Result<Prepared> {
    if let Some(c) = &spec.category {
        require(&table, c, &[DType::Categorical], "category")?;
    }
    if let Some(t) = &spec.text {
        require(&table, t, &[DType::Text, DType::Categorical], "text")?;
    }
    if let Some(v) = &spec.vector {
        require(&table, v, &[DType::Vector], "vector")?;
    }
    let mut table = table;
    match (spec.x.clone(), spec.y.clone()) {
        (Some(x), Some(y)) => {
            require(&table, &x, &[DType::Numerical], "x")?;
            require(&table, &y, &[DType::Numerical], "y")?;
            return Ok(Prepared { table, spec, x, y });
        }
        (None, None) => {}
        _ => return Err(Error::Param("--x and --y must be given together".into())),
    }
    if spec.vector.is_none() {
        let Some(text) = spec.text.clone() else {
            return Err(Error::Param("need --x/--y, --vector or --text to place points".into()));
        };
        if table.has_column(HASHED_EMBEDDING) {
            return Err(Error::Schema(format!("column {HASHED_EMBEDDING} already exists")));
        }
        let embedded = embed_column(table.column(&text)?, HASHED_EMBEDDING, DEFAULT_HASH_DIM)?;
        table = table.with_column(embedded)?;
        spec.vector = Some(HASHED_EMBEDDING.to_string());
    }
    let vector = spec.vector.clone().expect("set above");
    for name in [PROJECTION_X, PROJECTION_Y] {
        if table.has_column(name) {
            return Err(Error::Schema(format!("column {name} already exists")));
        }
    }
    let xy = pca_2d(table.column(&vector)?)?;
    let xs: Vec<f64> = xy.iter().map(|p| p[0]).collect();
    let ys: Vec<f64> = xy.iter().map(|p| p[1]).collect();
    table = table
        .with_column(atlas_core::data::Column::numerical(PROJECTION_X, xs))?
        .with_column(atlas_core::data::Column::numerical(PROJECTION_Y, ys))?;
    spec.x = Some(PROJECTION_X.into());
    spec.y = Some(PROJECTION_Y.into());
    Ok(Prepared {
        table,
        spec,
        x: PROJECTION_X.into(),
        y: PROJECTION_Y.into(),
    })
}
