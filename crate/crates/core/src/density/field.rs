use serde::{Deserialize, Serialize};

use super::deriche::blur_2d;
use crate::error::{Error, Result};
use crate::query::Bitmask;

/// Axis-aligned data-space rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extent {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Extent {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        let e = Extent { x0, x1, y0, y1 };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.x0, self.x1, self.y0, self.y1].iter().all(|v| v.is_finite()) && self.x0 < self.x1 && self.y0 < self.y1;
        if ok {
            Ok(())
        } else {
            Err(Error::Param(format!("degenerate extent {self:?}")))
        }
    }

    /// Bounding box of the finite points grown by `margin` (a fraction of each side).
    /// Zero-width sides are widened to one unit. `None` without finite points.
    pub fn covering(points: &[[f64; 2]], margin: f64) -> Option<Self> {
        let mut it = points.iter().filter(|p| p[0].is_finite() && p[1].is_finite());
        let first = it.next()?;
        let (mut x0, mut x1, mut y0, mut y1) = (first[0], first[0], first[1], first[1]);
        for p in it {
            x0 = x0.min(p[0]);
            x1 = x1.max(p[0]);
            y0 = y0.min(p[1]);
            y1 = y1.max(p[1]);
        }
        let grow = |lo: f64, hi: f64| {
            if hi > lo {
                let m = (hi - lo) * margin;
                (lo - m, hi + m)
            } else {
                (lo - 0.5, hi + 0.5)
            }
        };
        let (x0, x1) = grow(x0, x1);
        let (y0, y1) = grow(y0, y1);
        Some(Extent { x0, x1, y0, y1 })
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    /// Grid cell `(col, row)` holding the point; cells are right-open except the last.
    #[inline]
    pub fn cell_of(&self, x: f64, y: f64, nx: usize, ny: usize) -> Option<(usize, usize)> {
        if !self.contains(x, y) {
            return None;
        }
        let c = (((x - self.x0) / self.width()) * nx as f64) as usize;
        let r = (((y - self.y0) / self.height()) * ny as f64) as usize;
        Some((c.min(nx - 1), r.min(ny - 1)))
    }

    /// Data-space centre of cell `(col, row)`.
    pub fn cell_center(&self, col: usize, row: usize, nx: usize, ny: usize) -> [f64; 2] {
        [
            self.x0 + (col as f64 + 0.5) * self.width() / nx as f64,
            self.y0 + (row as f64 + 0.5) * self.height() / ny as f64,
        ]
    }
}

/// Raw point counts on a grid, row-major with row 0 at `y0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountGrid {
    pub nx: usize,
    pub ny: usize,
    pub extent: Extent,
    pub counts: Vec<f64>,
}

impl CountGrid {
    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }
}

/// Counts masked points with finite coordinates into an `nx × ny` grid.
/// Points outside the extent are ignored.
pub fn bin_points(points: &[[f64; 2]], mask: Option<&Bitmask>, extent: Extent, nx: usize, ny: usize) -> Result<CountGrid> {
    if nx < 2 || ny < 2 {
        return Err(Error::Param(format!("grid must be at least 2x2, got {nx}x{ny}")));
    }
    extent.validate()?;
    if let Some(m) = mask {
        if m.len() != points.len() {
            return Err(Error::Param(format!("mask has {} bits for {} points", m.len(), points.len())));
        }
    }
    let mut counts = vec![0.0; nx * ny];
    for (i, p) in points.iter().enumerate() {
        if mask.is_some_and(|m| !m.get(i)) {
            continue;
        }
        if let Some((c, r)) = extent.cell_of(p[0], p[1], nx, ny) {
            counts[r * nx + c] += 1.0;
        }
    }
    Ok(CountGrid { nx, ny, extent, counts })
}

/// Smoothed density grid. Values are expected counts per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityField {
    pub nx: usize,
    pub ny: usize,
    pub extent: Extent,
    /// Kernel σ in grid cells.
    pub bandwidth: f64,
    /// Sum of the raw binned weight before smoothing.
    pub total_weight: f64,
    /// Row-major, `ny` rows of `nx` cells, row 0 at `y0`.
    pub values: Vec<f64>,
}

/// Gaussian-smooths a count grid with the recursive filter and clamps undershoot to zero.
pub fn smooth_deriche(grid: &CountGrid, sigma: f64) -> Result<DensityField> {
    let mut values = grid.counts.clone();
    blur_2d(&mut values, grid.nx, grid.ny, sigma)?;
    for v in &mut values {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(DensityField {
        nx: grid.nx,
        ny: grid.ny,
        extent: grid.extent,
        bandwidth: sigma,
        total_weight: grid.total(),
        values,
    })
}

/// Bins then smooths in one step.
pub fn kde(points: &[[f64; 2]], mask: Option<&Bitmask>, extent: Extent, nx: usize, ny: usize, sigma: f64) -> Result<DensityField> {
    smooth_deriche(&bin_points(points, mask, extent, nx, ny)?, sigma)
}

impl DensityField {
    #[inline]
    pub fn at(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.nx + col]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn cell_size(&self) -> (f64, f64) {
        (self.extent.width() / self.nx as f64, self.extent.height() / self.ny as f64)
    }

    /// Continuous grid coordinates where cell centres fall on integers.
    fn grid_coords(&self, x: f64, y: f64) -> (f64, f64) {
        let (dx, dy) = self.cell_size();
        ((x - self.extent.x0) / dx - 0.5, (y - self.extent.y0) / dy - 0.5)
    }

    /// Bilinear interpolation between cell centres, constant beyond the outermost
    /// centres, zero outside the extent.
    pub fn density_at(&self, x: f64, y: f64) -> f64 {
        if !self.extent.contains(x, y) || self.values.is_empty() {
            return 0.0;
        }
        let (gx, gy) = self.grid_coords(x, y);
        let gx = gx.clamp(0.0, (self.nx - 1) as f64);
        let gy = gy.clamp(0.0, (self.ny - 1) as f64);
        let c0 = (gx.floor() as usize).min(self.nx.saturating_sub(2));
        let r0 = (gy.floor() as usize).min(self.ny.saturating_sub(2));
        let c1 = (c0 + 1).min(self.nx - 1);
        let r1 = (r0 + 1).min(self.ny - 1);
        let (tx, ty) = (gx - c0 as f64, gy - r0 as f64);
        let bottom = self.at(c0, r0) + (self.at(c1, r0) - self.at(c0, r0)) * tx;
        let top = self.at(c0, r1) + (self.at(c1, r1) - self.at(c0, r1)) * tx;
        bottom + (top - bottom) * ty
    }

    /// `p`-quantile (nearest rank) of the strictly positive cells; 0 if there are none.
    pub fn positive_quantile(&self, p: f64) -> f64 {
        let mut pos: Vec<f64> = self.values.iter().copied().filter(|v| *v > 0.0).collect();
        if pos.is_empty() {
            return 0.0;
        }
        pos.sort_by(f64::total_cmp);
        let rank = ((p.clamp(0.0, 1.0) * pos.len() as f64).ceil() as usize).clamp(1, pos.len());
        pos[rank - 1]
    }
}

/// Size in bytes of the tile header.
pub const TILE_HEADER_LEN: usize = 48;

/// Binary tile: `u32 nx, u32 ny, f64 x0, x1, y0, y1, f64 σ`, then `nx·ny` `f32`
/// values row-major with row 0 at `y0`. All little-endian.
pub fn encode_tile(field: &DensityField) -> Vec<u8> {
    let mut out = Vec::with_capacity(TILE_HEADER_LEN + 4 * field.values.len());
    out.extend_from_slice(&(field.nx as u32).to_le_bytes());
    out.extend_from_slice(&(field.ny as u32).to_le_bytes());
    for v in [field.extent.x0, field.extent.x1, field.extent.y0, field.extent.y1, field.bandwidth] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in &field.values {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    out
}

/// Parses a tile. `total_weight` is recomputed from the payload.
pub fn decode_tile(bytes: &[u8]) -> Result<DensityField> {
    if bytes.len() < TILE_HEADER_LEN {
        return Err(Error::Param(format!("tile too short: {} bytes", bytes.len())));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let (nx, ny) = (u32_at(0), u32_at(4));
    let extent = Extent {
        x0: f64_at(8),
        x1: f64_at(16),
        y0: f64_at(24),
        y1: f64_at(32),
    };
    let bandwidth = f64_at(40);
    let expected = nx
        .checked_mul(ny)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(TILE_HEADER_LEN));
    if expected != Some(bytes.len()) {
        return Err(Error::Param(format!("tile payload length {} does not match {nx}x{ny}", bytes.len())));
    }
    let values: Vec<f64> = bytes[TILE_HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    Ok(DensityField {
        nx,
        ny,
        extent,
        bandwidth,
        total_weight: values.iter().sum(),
        values,
    })
}
