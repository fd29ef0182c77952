use serde::{Deserialize, Serialize};

use super::plan::{plan, LabelCandidate, LabelPlan};
use crate::clustering::{ClusterLevel, ClusterModel};
use crate::error::Result;

/// One label plan per cluster level, coarse to fine, and the zooms at which
/// the active level advances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelLayers {
    pub levels: Vec<LabelPlan>,
    /// `switch_zooms[l]` is where level `l + 1` replaces level `l`; non-decreasing.
    pub switch_zooms: Vec<f64>,
}

pub fn candidates_for(level: &ClusterLevel) -> Vec<LabelCandidate> {
    level
        .clusters
        .iter()
        .map(|c| LabelCandidate::new(c.anchor, c.label.clone(), c.peak_density))
        .collect()
}

fn median_min_zoom(plan: &LabelPlan) -> f64 {
    let mut z: Vec<f64> = plan.labels.iter().filter_map(|l| l.min_zoom).collect();
    if z.is_empty() {
        return plan.z_lo;
    }
    z.sort_by(f64::total_cmp);
    let n = z.len();
    if n % 2 == 1 {
        z[n / 2]
    } else {
        (z[n / 2 - 1] * z[n / 2]).sqrt()
    }
}

impl LabelLayers {
    pub fn build(model: &ClusterModel, z_lo: f64, z_hi: f64) -> Result<Self> {
        let levels = model
            .levels
            .iter()
            .map(|l| plan(&candidates_for(l), z_lo, z_hi))
            .collect::<Result<Vec<_>>>()?;
        let mut switch_zooms = Vec::new();
        let mut last = z_lo;
        for pair in levels.windows(2) {
            let s = (median_min_zoom(&pair[0]) * median_min_zoom(&pair[1])).sqrt().max(last);
            switch_zooms.push(s);
            last = s;
        }
        Ok(LabelLayers { levels, switch_zooms })
    }

    /// Index of the level shown at `zoom`.
    pub fn active_level(&self, zoom: f64) -> usize {
        self.switch_zooms.iter().filter(|s| **s <= zoom).count()
    }
}
