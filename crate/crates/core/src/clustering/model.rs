use serde::{Deserialize, Serialize};

use super::peaks::{assign_points, find_peaks, Peak, DEFAULT_MIN_SEPARATION, DEFAULT_NOISE_QUANTILE};
use super::summary::{summarize_clusters, DEFAULT_TOP_K};
use crate::data::ColumnTable;
use crate::density::{kde, DensityField, Extent};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    pub nx: usize,
    pub ny: usize,
    /// Kernel σ per level in grid cells, coarse to fine.
    pub sigmas: Vec<f64>,
    pub noise_quantile: f64,
    pub min_separation: f64,
    pub top_k: usize,
}

impl Default for ClusterParams {
    fn default() -> Self {
        ClusterParams {
            nx: 256,
            ny: 256,
            sigmas: vec![32.0, 16.0, 8.0],
            noise_quantile: DEFAULT_NOISE_QUANTILE,
            min_separation: DEFAULT_MIN_SEPARATION,
            top_k: DEFAULT_TOP_K,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub id: u32,
    /// Density-weighted centroid of the member points.
    pub anchor: [f64; 2],
    pub label: String,
    pub size: usize,
    pub peak_density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterLevel {
    pub bandwidth: f64,
    pub peaks: Vec<Peak>,
    pub clusters: Vec<ClusterSummary>,
    /// Cluster id per point; `None` is noise.
    #[serde(skip)]
    pub assignment: Vec<Option<u32>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ClusterModel {
    /// Coarse to fine.
    pub levels: Vec<ClusterLevel>,
}

/// Where cluster label text comes from.
#[derive(Debug, Clone, Copy)]
pub struct TextSource<'a> {
    pub table: &'a ColumnTable,
    pub column: &'a str,
}

fn anchors(points: &[[f64; 2]], field: &DensityField, assignment: &[Option<u32>], k: usize) -> Vec<([f64; 2], usize)> {
    let mut acc = vec![(0.0, 0.0, 0.0, 0.0, 0.0, 0usize); k];
    for (p, id) in points.iter().zip(assignment) {
        let Some(id) = id else { continue };
        let w = field.density_at(p[0], p[1]);
        let a = &mut acc[*id as usize];
        a.0 += w * p[0];
        a.1 += w * p[1];
        a.2 += w;
        a.3 += p[0];
        a.4 += p[1];
        a.5 += 1;
    }
    acc.into_iter()
        .map(|(wx, wy, w, sx, sy, n)| {
            if w > 0.0 {
                ([wx / w, wy / w], n)
            } else {
                ([sx / n as f64, sy / n as f64], n)
            }
        })
        .collect()
}

/// Clusters one density field.
pub fn cluster_level(
    points: &[[f64; 2]],
    field: &DensityField,
    params: &ClusterParams,
    text: Option<TextSource<'_>>,
) -> ClusterLevel {
    let peaks = find_peaks(field, params.noise_quantile, params.min_separation);
    let assignment = assign_points(points, field, &peaks, params.noise_quantile);
    let k = peaks.len();
    let labels = match text {
        Some(t) => summarize_clusters(t.table, Some(t.column), &assignment, k, params.top_k),
        None => summarize_clusters(&ColumnTable::default(), None, &assignment, k, params.top_k),
    };
    let clusters = anchors(points, field, &assignment, k)
        .into_iter()
        .zip(labels)
        .zip(&peaks)
        .enumerate()
        .map(|(id, (((anchor, size), label), peak))| ClusterSummary {
            id: id as u32,
            anchor,
            label,
            size,
            peak_density: peak.density,
        })
        .collect();
    ClusterLevel {
        bandwidth: field.bandwidth,
        peaks,
        clusters,
        assignment,
    }
}

/// One clustering level per σ over the same grid and extent.
pub fn build_multiresolution(
    points: &[[f64; 2]],
    extent: Extent,
    params: &ClusterParams,
    text: Option<TextSource<'_>>,
) -> Result<ClusterModel> {
    if params.sigmas.is_empty() {
        return Err(Error::Param("at least one bandwidth level is required".into()));
    }
    if params.sigmas.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Param("bandwidth levels must be ordered coarse to fine".into()));
    }
    let levels = params
        .sigmas
        .iter()
        .map(|sigma| {
            let field = kde(points, None, extent, params.nx, params.ny, *sigma)?;
            Ok(cluster_level(points, &field, params, text))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ClusterModel { levels })
}
