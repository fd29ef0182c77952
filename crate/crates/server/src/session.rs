//! Single-dataset session state.
//!
//! Reads take a snapshot (`Arc<Dataset>` plus a cloned selection and its
//! revision) and never hold a lock while computing. Selection changes go
//! through one write lock, which bumps the revision and broadcasts it.

use std::sync::{Arc, RwLock};

use atlas_core::data::{ColumnData, ColumnTable, NULL_CODE};
use atlas_core::neighbors::{SpatialIndex2D, VectorIndex};
use atlas_core::query::{evaluate, Bitmask, Predicate, SelectionContext};
use atlas_core::{Error, Result};
use tokio::sync::broadcast;

use crate::dataset::{DatasetSpec, Prepared};
use crate::pipeline::Artifacts;

/// Immutable dataset snapshot with its computed artifacts and indexes.
#[derive(Debug)]
pub struct Dataset {
    pub table: ColumnTable,
    pub spec: DatasetSpec,
    pub x: String,
    pub y: String,
    pub points: Vec<[f64; 2]>,
    /// Category code per row (`NULL_CODE` when absent), if a category column is set.
    pub categories: Option<Vec<u32>>,
    pub artifacts: Artifacts,
    pub spatial: SpatialIndex2D,
    pub vectors: Option<VectorIndex>,
}

impl Dataset {
    pub fn new(prepared: Prepared, artifacts: Artifacts) -> Result<Self> {
        let Prepared { table, spec, x, y } = prepared;
        let points = table.points(&x, &y)?;
        let categories = match &spec.category {
            Some(c) => match table.column(c)?.data() {
                ColumnData::Categorical { codes, .. } => Some(codes.clone()),
                _ => return Err(Error::Schema(format!("category column {c} is not categorical"))),
            },
            None => None,
        };
        let vectors = spec
            .vector
            .as_deref()
            .map(|v| table.column(v).and_then(VectorIndex::from_column))
            .transpose()?;
        let spatial = SpatialIndex2D::build(&points);
        Ok(Dataset {
            table,
            spec,
            x,
            y,
            points,
            categories,
            artifacts,
            spatial,
            vectors,
        })
    }

    pub fn category_of(&self, row: usize) -> u32 {
        self.categories.as_ref().map_or(NULL_CODE, |c| c[row])
    }
}

#[derive(Debug, Clone, Default)]
pub struct Selection {
    pub context: SelectionContext,
    pub revision: u64,
}

impl Selection {
    /// Rows passing every entry except the one owned by `view`.
    pub fn mask(&self, table: &ColumnTable, view: Option<&str>) -> Result<Bitmask> {
        let p = self.context.resolve(view);
        if p.is_all() {
            return Ok(Bitmask::ones(table.row_count()));
        }
        evaluate(table, &p)
    }
}

/// Why a selection write was refused.
#[derive(Debug)]
pub enum WriteError {
    Invalid(Error),
    /// The caller expected a different revision; carries the current one.
    Stale { current: u64 },
}

impl From<Error> for WriteError {
    fn from(e: Error) -> Self {
        WriteError::Invalid(e)
    }
}

#[derive(Debug)]
pub struct Session {
    dataset: RwLock<Arc<Dataset>>,
    selection: RwLock<Selection>,
    updates: broadcast::Sender<u64>,
}

impl Session {
    pub fn new(dataset: Dataset) -> Self {
        let (updates, _) = broadcast::channel(256);
        Session {
            dataset: RwLock::new(Arc::new(dataset)),
            selection: RwLock::new(Selection::default()),
            updates,
        }
    }

    pub fn from_prepared(prepared: Prepared, artifacts: Artifacts) -> Result<Self> {
        Ok(Session::new(Dataset::new(prepared, artifacts)?))
    }

    pub fn dataset(&self) -> Arc<Dataset> {
        self.dataset.read().expect("dataset lock").clone()
    }

    /// Replaces the dataset snapshot; in-flight readers keep the old one.
    pub fn swap_dataset(&self, dataset: Dataset) {
        *self.dataset.write().expect("dataset lock") = Arc::new(dataset);
    }

    pub fn selection(&self) -> Selection {
        self.selection.read().expect("selection lock").clone()
    }

    pub fn revision(&self) -> u64 {
        self.selection.read().expect("selection lock").revision
    }

    pub fn subscribe(&self) -> broadcast::Receiver<u64> {
        self.updates.subscribe()
    }

    /// Sets (or with `None` clears) the predicate owned by `view`. Every accepted
    /// write bumps the revision, including a clear of an absent entry.
    pub fn set_selection(&self, view: &str, predicate: Option<Predicate>, expected: Option<u64>) -> Result<Selection, WriteError> {
        if view.is_empty() {
            return Err(Error::Param("view id must not be empty".into()).into());
        }
        let dataset = self.dataset();
        if let Some(p) = &predicate {
            // rejects unknown columns and type mismatches before anything changes
            evaluate(&dataset.table, p)?;
        }
        let mut sel = self.selection.write().expect("selection lock");
        if let Some(e) = expected {
            if e != sel.revision {
                return Err(WriteError::Stale { current: sel.revision });
            }
        }
        match predicate {
            Some(p) => sel.context.set(view, p),
            None => {
                sel.context.clear(view);
            }
        }
        sel.revision += 1;
        // no receivers is fine
        let _ = self.updates.send(sel.revision);
        Ok(sel.clone())
    }
}
