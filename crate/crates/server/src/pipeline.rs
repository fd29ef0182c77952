//! Precomputed artifacts: extent, multi-resolution clusters and label layers.

use atlas_core::clustering::{build_multiresolution, ClusterModel, ClusterParams, TextSource};
use atlas_core::density::Extent;
use atlas_core::labeling::LabelLayers;
use atlas_core::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::dataset::Prepared;

/// Relative padding around the point cloud.
pub const EXTENT_MARGIN: f64 = 0.02;
/// Screen size whose fit-to-data zoom is the lowest label zoom.
pub const REFERENCE_VIEW_PX: f64 = 800.0;
/// Label plans cover six octaves above the fit zoom.
pub const LABEL_OCTAVES: i32 = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifacts {
    pub extent: Extent,
    pub z_lo: f64,
    pub z_hi: f64,
    pub clusters: ClusterModel,
    /// Per level, per row cluster id (`None` for noise or rows without a position).
    pub assignments: Vec<Vec<Option<u32>>>,
    pub labels: LabelLayers,
}

pub fn fit_zoom(extent: &Extent) -> f64 {
    REFERENCE_VIEW_PX / extent.width().max(extent.height())
}

pub fn compute(prepared: &Prepared, params: &ClusterParams) -> Result<Artifacts> {
    let points = prepared.table.points(&prepared.x, &prepared.y)?;
    let extent = Extent::covering(&points, EXTENT_MARGIN)
        .ok_or_else(|| Error::Param("no row has a finite position".into()))?;
    let text = prepared.spec.text.as_deref().map(|column| TextSource {
        table: &prepared.table,
        column,
    });
    let clusters = build_multiresolution(&points, extent, params, text)?;
    let z_lo = fit_zoom(&extent);
    let z_hi = z_lo * 2f64.powi(LABEL_OCTAVES);
    let labels = LabelLayers::build(&clusters, z_lo, z_hi)?;
    let assignments = clusters.levels.iter().map(|l| l.assignment.clone()).collect();
    Ok(Artifacts {
        extent,
        z_lo,
        z_hi,
        clusters,
        assignments,
        labels,
    })
}

impl Artifacts {
    /// Restores the per-level assignments that the cluster model does not serialize.
    pub fn into_restored(mut self) -> Self {
        for (level, a) in self.clusters.levels.iter_mut().zip(&self.assignments) {
            level.assignment = a.clone();
        }
        self
    }
}
