//! Density mode: each category field becomes a translucent layer whose opacity
//! is `clamp(density / q95, 0, 1)·α_max`, with q95 the 95th percentile of the
//! field's positive cells. Contour strokes are extra opaque layers in the same
//! OIT accumulation, so stacking order never matters.

use atlas_core::density::{contours, DensityField};
use atlas_core::view::Viewport;
use atlas_core::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::frame::FrameBuffer;
use crate::oit::{accumulate, empty_accumulators, resolve, STRIDE};
use crate::style::{check_color, TABLEAU10, WHITE};

pub const DEFAULT_ALPHA_MAX: f32 = 0.85;
pub const OPACITY_QUANTILE: f64 = 0.95;
/// Contour colour is the category colour scaled by this factor.
pub const CONTOUR_DARKEN: f32 = 0.6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityStyle {
    pub alpha_max: f32,
    /// Colour per field, by position in the field list.
    pub palette: Vec<[f32; 3]>,
    pub background: [f32; 4],
}

impl Default for DensityStyle {
    fn default() -> Self {
        DensityStyle {
            alpha_max: DEFAULT_ALPHA_MAX,
            palette: TABLEAU10.to_vec(),
            background: WHITE,
        }
    }
}

/// Opacity of a density sample given the field's q95 normaliser.
#[inline]
pub fn density_opacity(density: f64, q95: f64, alpha_max: f32) -> f32 {
    if !(q95 > 0.0) || !(density > 0.0) {
        return 0.0;
    }
    ((density / q95).min(1.0) as f32) * alpha_max
}

pub fn darken(rgb: [f32; 3]) -> [f32; 3] {
    rgb.map(|c| c * CONTOUR_DARKEN)
}

/// Marks the pixels crossed by a screen-space segment, sampling at most every half pixel.
fn stroke_segment(mask: &mut [bool], w: u32, h: u32, a: [f64; 2], b: [f64; 2]) {
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    let steps = (len * 2.0).ceil().max(1.0) as usize;
    for s in 0..=steps {
        let t = s as f64 / steps as f64;
        let x = a[0] + t * (b[0] - a[0]);
        let y = a[1] + t * (b[1] - a[1]);
        if x >= 0.0 && y >= 0.0 && x < w as f64 && y < h as f64 {
            mask[y as usize * w as usize + x as usize] = true;
        }
    }
}

fn contour_mask(field: &DensityField, levels: &[f64], viewport: &Viewport) -> Vec<bool> {
    let (w, h) = (viewport.width, viewport.height);
    let mut mask = vec![false; w as usize * h as usize];
    for level in contours(field, levels).levels {
        for line in level.lines {
            let pts: Vec<[f64; 2]> = line.points.iter().map(|p| viewport.to_screen(p[0], p[1])).collect();
            for seg in pts.windows(2) {
                stroke_segment(&mut mask, w, h, seg[0], seg[1]);
            }
            if line.closed && pts.len() > 2 {
                stroke_segment(&mut mask, w, h, pts[pts.len() - 1], pts[0]);
            }
        }
    }
    mask
}

/// Renders per-category density fields with 1 px contour strokes at `levels`
/// (absolute density values, as in the field).
pub fn render_density(
    fields: &[DensityField],
    viewport: &Viewport,
    levels: &[f64],
    style: &DensityStyle,
) -> Result<FrameBuffer> {
    viewport.validate()?;
    if !(style.alpha_max > 0.0 && style.alpha_max <= 1.0) {
        return Err(Error::Param(format!("alpha_max must lie in (0, 1], got {}", style.alpha_max)));
    }
    check_color(&style.background, "background")?;
    if style.palette.len() < fields.len() {
        return Err(Error::Param(format!(
            "palette has {} colours for {} fields",
            style.palette.len(),
            fields.len()
        )));
    }
    for c in &style.palette[..fields.len()] {
        check_color(c, "palette colour")?;
    }
    if let Some(first) = fields.first() {
        if let Some(bad) = fields.iter().find(|f| f.extent != first.extent) {
            return Err(Error::Param(format!(
                "density fields must share an extent: {:?} vs {:?}",
                first.extent, bad.extent
            )));
        }
    }
    let (w, h) = (viewport.width, viewport.height);
    let q95: Vec<f64> = fields.iter().map(|f| f.positive_quantile(OPACITY_QUANTILE)).collect();
    let strokes: Vec<Vec<bool>> = fields.iter().map(|f| contour_mask(f, levels, viewport)).collect();

    let mut acc = empty_accumulators(w as usize * h as usize);
    acc.par_chunks_mut(STRIDE * w as usize).enumerate().for_each(|(py, row)| {
        for px in 0..w as usize {
            let [x, y] = viewport.to_data(px as f64 + 0.5, py as f64 + 0.5);
            let cell = &mut row[px * STRIDE..(px + 1) * STRIDE];
            for (k, field) in fields.iter().enumerate() {
                let a = density_opacity(field.density_at(x, y), q95[k], style.alpha_max);
                if a > 0.0 {
                    accumulate(cell, style.palette[k], a);
                }
                if strokes[k][py * w as usize + px] {
                    accumulate(cell, darken(style.palette[k]), 1.0);
                }
            }
        }
    });
    Ok(resolve(&acc, w, h, style.background))
}
