use serde::{Deserialize, Serialize};

use crate::density::DensityField;

/// Cells at or below this fraction of the field maximum are treated as empty.
/// The recursive filter leaves isolated ripples around 1e-8 of the peak in
/// otherwise empty regions; they must not count as positive density.
pub const POSITIVE_FLOOR: f64 = 1e-6;

/// The threshold never drops below the peak height of this many coincident
/// points, so a bump left by a stray point or two in a sparse tail is noise.
pub const MIN_PEAK_POINTS: f64 = 3.0;

pub const DEFAULT_NOISE_QUANTILE: f64 = 0.05;
pub const DEFAULT_MIN_SEPARATION: f64 = 4.0;

/// 8-neighbourhood offsets `(dr, dc)` in lexicographic order.
const NEIGHBOURS: [(isize, isize); 8] = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub col: usize,
    pub row: usize,
    pub density: f64,
}

/// Density at or above which a cell belongs to some cluster: the nearest-rank
/// `quantile` of the positive cells, raised to at least the smoothed peak of
/// [`MIN_PEAK_POINTS`] points. Assumes the field holds smoothed point counts.
/// `None` for an empty field.
pub fn noise_threshold(field: &DensityField, quantile: f64) -> Option<f64> {
    let floor = field.max_value() * POSITIVE_FLOOR;
    let mut positive: Vec<f64> = field.values.iter().copied().filter(|v| *v > floor).collect();
    if positive.is_empty() {
        return None;
    }
    positive.sort_by(f64::total_cmp);
    let rank = ((quantile.clamp(0.0, 1.0) * positive.len() as f64).ceil() as usize).clamp(1, positive.len());
    let sigma = field.bandwidth;
    let min_peak = MIN_PEAK_POINTS / (2.0 * std::f64::consts::PI * sigma * sigma);
    Some(positive[rank - 1].max(min_peak))
}

fn neighbours(field: &DensityField, col: usize, row: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
    NEIGHBOURS.iter().filter_map(move |(dr, dc)| {
        let r = row.checked_add_signed(*dr)?;
        let c = col.checked_add_signed(*dc)?;
        (r < field.ny && c < field.nx).then_some((c, r))
    })
}

pub fn is_strict_local_max(field: &DensityField, col: usize, row: usize) -> bool {
    let v = field.at(col, row);
    neighbours(field, col, row).all(|(c, r)| field.at(c, r) < v)
}

/// Strict local maxima above the noise threshold, densest first, with maxima
/// closer than `min_separation` cells to a denser survivor removed. Equal
/// densities are ordered by `(row, col)`.
pub fn find_peaks(field: &DensityField, noise_quantile: f64, min_separation: f64) -> Vec<Peak> {
    let Some(threshold) = noise_threshold(field, noise_quantile) else {
        return Vec::new();
    };
    let mut candidates = Vec::new();
    for row in 0..field.ny {
        for col in 0..field.nx {
            let density = field.at(col, row);
            if density >= threshold && is_strict_local_max(field, col, row) {
                candidates.push(Peak { col, row, density });
            }
        }
    }
    candidates.sort_by(|a, b| b.density.total_cmp(&a.density).then((a.row, a.col).cmp(&(b.row, b.col))));
    let mut kept: Vec<Peak> = Vec::new();
    for p in candidates {
        let far = kept.iter().all(|q| {
            let (dc, dr) = (p.col as f64 - q.col as f64, p.row as f64 - q.row as f64);
            (dc * dc + dr * dr).sqrt() >= min_separation
        });
        if far {
            kept.push(p);
        }
    }
    kept
}

/// Cluster id of every grid cell (row-major), by steepest ascent to a peak.
/// Cells below the threshold are `None`. An ascent ending on a maximum that was
/// not kept as a peak joins the nearest kept peak at least as dense, if any.
pub fn assign_cells(field: &DensityField, peaks: &[Peak], noise_quantile: f64) -> Vec<Option<u32>> {
    let n = field.nx * field.ny;
    let Some(threshold) = noise_threshold(field, noise_quantile) else {
        return vec![None; n];
    };
    let mut peak_at = vec![None; n];
    for (id, p) in peaks.iter().enumerate() {
        peak_at[p.row * field.nx + p.col] = Some(id as u32);
    }

    // uphill neighbour of every cell, or itself at a local maximum
    let up: Vec<usize> = (0..n)
        .map(|i| {
            let (col, row) = (i % field.nx, i / field.nx);
            let mut best = (field.values[i], i);
            for (c, r) in neighbours(field, col, row) {
                let v = field.at(c, r);
                if v > best.0 {
                    best = (v, r * field.nx + c);
                }
            }
            best.1
        })
        .collect();

    let terminal_id = |t: usize| -> Option<u32> {
        if let Some(id) = peak_at[t] {
            return Some(id);
        }
        let (tc, tr, tv) = ((t % field.nx) as f64, (t / field.nx) as f64, field.values[t]);
        peaks
            .iter()
            .enumerate()
            .filter(|(_, p)| p.density >= tv)
            .map(|(id, p)| ((p.col as f64 - tc).powi(2) + (p.row as f64 - tr).powi(2), id))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, id)| id as u32)
    };

    let mut resolved: Vec<Option<Option<u32>>> = vec![None; n];
    let mut path = Vec::new();
    for start in 0..n {
        if field.values[start] < threshold || resolved[start].is_some() {
            continue;
        }
        let mut i = start;
        let id = loop {
            if let Some(id) = resolved[i] {
                break id;
            }
            path.push(i);
            if up[i] == i {
                break terminal_id(i);
            }
            i = up[i];
        };
        for j in path.drain(..) {
            resolved[j] = Some(id);
        }
    }
    (0..n)
        .map(|i| if field.values[i] >= threshold { resolved[i].flatten() } else { None })
        .collect()
}

/// Cluster id per point from the cell containing it; `None` for noise,
/// non-finite coordinates, or points outside the field extent.
pub fn assign_points(points: &[[f64; 2]], field: &DensityField, peaks: &[Peak], noise_quantile: f64) -> Vec<Option<u32>> {
    let cells = assign_cells(field, peaks, noise_quantile);
    points
        .iter()
        .map(|p| {
            let (c, r) = field.extent.cell_of(p[0], p[1], field.nx, field.ny)?;
            cells[r * field.nx + c]
        })
        .collect()
}
