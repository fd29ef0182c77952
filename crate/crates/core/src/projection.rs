//! Fixture-only embedding: hashed bag-of-words vectors and PCA to two dimensions.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::data::{Column, ColumnData};
use crate::error::{Error, Result};

pub const DEFAULT_HASH_DIM: usize = 64;

/// 64-bit FNV-1a; stable across platforms and releases, unlike `DefaultHasher`.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ *b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

/// Signed feature hashing of lowercase alphanumeric tokens, L2-normalized.
/// Text without tokens maps to the zero vector.
pub fn hash_embed(text: &str, dim: usize) -> Vec<f32> {
    let mut v = vec![0.0f64; dim];
    for tok in text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()) {
        let h = fnv1a(tok.to_lowercase().as_bytes());
        let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
        v[(h % dim as u64) as usize] += sign;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| if norm > 0.0 { (x / norm) as f32 } else { 0.0 }).collect()
}

/// Embeds a text or categorical column into a vector column; null cells stay null.
pub fn embed_column(column: &Column, name: &str, dim: usize) -> Result<Column> {
    if !matches!(column.data(), ColumnData::Text(_) | ColumnData::Categorical { .. }) {
        return Err(Error::Query(format!("cannot embed {} column {}", format!("{:?}", column.dtype()).to_lowercase(), column.name())));
    }
    let rows: Vec<Option<Vec<f32>>> = (0..column.len()).map(|r| column.str_value(r).map(|s| hash_embed(s, dim))).collect();
    Column::vector(name, dim, &rows)
}

/// Projects the valid rows of a vector column onto its two leading principal
/// components. Rows without a vector get `(NaN, NaN)`. Each axis is signed so
/// its largest-magnitude loading is positive.
pub fn pca_2d(column: &Column) -> Result<Vec<[f64; 2]>> {
    let ColumnData::Vector { dim, .. } = column.data() else {
        return Err(Error::Query(format!("column {} is not a vector column", column.name())));
    };
    let dim = *dim;
    let rows: Vec<usize> = (0..column.len()).filter(|r| column.vector_row(*r).is_some()).collect();
    let mut out = vec![[f64::NAN, f64::NAN]; column.len()];
    if rows.is_empty() {
        return Ok(out);
    }
    let mut mean = vec![0.0f64; dim];
    for r in &rows {
        for (m, v) in mean.iter_mut().zip(column.vector_row(*r).unwrap()) {
            *m += *v as f64;
        }
    }
    mean.iter_mut().for_each(|m| *m /= rows.len() as f64);
    let mut cov = DMatrix::<f64>::zeros(dim, dim);
    let mut centred = vec![0.0f64; dim];
    for r in &rows {
        for (c, (v, m)) in centred.iter_mut().zip(column.vector_row(*r).unwrap().iter().zip(&mean)) {
            *c = *v as f64 - m;
        }
        for i in 0..dim {
            for j in i..dim {
                cov[(i, j)] += centred[i] * centred[j];
            }
        }
    }
    for i in 0..dim {
        for j in 0..i {
            cov[(i, j)] = cov[(j, i)];
        }
    }
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|a, b| eig.eigenvalues[*b].total_cmp(&eig.eigenvalues[*a]).then(a.cmp(b)));
    let axes: Vec<Vec<f64>> = order
        .iter()
        .take(2)
        .map(|k| {
            let col: Vec<f64> = eig.eigenvectors.column(*k).iter().copied().collect();
            let pivot = col.iter().copied().fold(0.0f64, |best, v| if v.abs() > best.abs() { v } else { best });
            if pivot < 0.0 {
                col.iter().map(|v| -v).collect()
            } else {
                col
            }
        })
        .collect();
    for r in rows {
        let v = column.vector_row(r).unwrap();
        let mut p = [0.0; 2];
        for (slot, axis) in p.iter_mut().zip(&axes) {
            *slot = v.iter().zip(&mean).zip(axis).map(|((x, m), a)| (*x as f64 - m) * a).sum();
        }
        out[r] = p;
    }
    Ok(out)
}
