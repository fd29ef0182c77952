use rayon::prelude::*;

use super::kdtree::Neighbor;
use crate::data::{Column, ColumnData};
use crate::error::{Error, Result};

/// Unit-normalized vectors with their row ids, searched by exact linear scan.
#[derive(Debug, Clone)]
pub struct VectorIndex {
    dim: usize,
    /// Row-major `ids.len() × dim`.
    values: Vec<f32>,
    ids: Vec<u32>,
    /// Row id → slot in `ids`, `u32::MAX` when absent.
    slot: Vec<u32>,
    /// Rows whose vector has zero length.
    zero_rows: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;
const SCAN_CHUNK: usize = 4096;

fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(x, y)| *x as f64 * *y as f64).sum()
}

fn normalize(v: &[f32]) -> Option<Vec<f32>> {
    let norm = v.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
    (norm > 0.0 && norm.is_finite()).then(|| v.iter().map(|x| (*x as f64 / norm) as f32).collect())
}

impl VectorIndex {
    /// Indexes every valid, non-zero row of a vector column.
    pub fn from_column(column: &Column) -> Result<Self> {
        let ColumnData::Vector { dim, .. } = column.data() else {
            return Err(Error::Query(format!("column {} is not a vector column", column.name())));
        };
        Ok(Self::from_rows(*dim, (0..column.len()).map(|r| column.vector_row(r))))
    }

    pub fn from_rows<'a>(dim: usize, rows: impl Iterator<Item = Option<&'a [f32]>>) -> Self {
        let mut index = VectorIndex {
            dim,
            values: Vec::new(),
            ids: Vec::new(),
            slot: Vec::new(),
            zero_rows: Vec::new(),
        };
        for (row, v) in rows.enumerate() {
            index.slot.push(ABSENT);
            let Some(v) = v else { continue };
            match normalize(v) {
                Some(unit) => {
                    index.slot[row] = index.ids.len() as u32;
                    index.ids.push(row as u32);
                    index.values.extend(unit);
                }
                None => index.zero_rows.push(row as u32),
            }
        }
        index
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn zero_rows(&self) -> &[u32] {
        &self.zero_rows
    }

    /// Stored unit vector of a row.
    pub fn vector(&self, row: u32) -> Option<&[f32]> {
        let s = *self.slot.get(row as usize)?;
        (s != ABSENT).then(|| &self.values[s as usize * self.dim..(s as usize + 1) * self.dim])
    }

    /// k nearest rows to `row` by cosine distance `1 − dot`, excluding `row`; ties by row id.
    pub fn knn_row(&self, row: u32, k: usize) -> Result<Vec<Neighbor>> {
        let q = self
            .vector(row)
            .ok_or_else(|| Error::Query(format!("row {row} has no indexed vector")))?
            .to_vec();
        Ok(self.scan(&q, k, Some(row)))
    }

    /// k nearest rows to an arbitrary query vector.
    pub fn knn_vector(&self, query: &[f32], k: usize) -> Result<Vec<Neighbor>> {
        if query.len() != self.dim {
            return Err(Error::Query(format!("query has {} dimensions, index has {}", query.len(), self.dim)));
        }
        let q = normalize(query).ok_or_else(|| Error::Query("query vector has zero length".into()))?;
        Ok(self.scan(&q, k, None))
    }

    fn scan(&self, q: &[f32], k: usize, exclude: Option<u32>) -> Vec<Neighbor> {
        if k == 0 || self.is_empty() {
            return Vec::new();
        }
        let order = |a: &Neighbor, b: &Neighbor| a.distance.total_cmp(&b.distance).then(a.id.cmp(&b.id));
        let mut best: Vec<Neighbor> = self
            .values
            .par_chunks(SCAN_CHUNK * self.dim)
            .enumerate()
            .flat_map_iter(|(c, chunk)| {
                let mut local: Vec<Neighbor> = chunk
                    .chunks_exact(self.dim)
                    .enumerate()
                    .map(|(i, v)| Neighbor {
                        id: self.ids[c * SCAN_CHUNK + i],
                        distance: 1.0 - dot(q, v),
                    })
                    .filter(|n| Some(n.id) != exclude)
                    .collect();
                if local.len() > k {
                    local.select_nth_unstable_by(k - 1, order);
                    local.truncate(k);
                }
                local
            })
            .collect();
        best.sort_by(order);
        best.truncate(k);
        best
    }
}
