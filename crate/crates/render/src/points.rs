//! Point splatting. Discs are anti-aliased by 2×2 supersampling of rim pixels:
//! a pixel whose centre is within `r − √½` of the point is fully covered, one
//! beyond `r + √½` is untouched, and any other pixel gets the fraction of its
//! four sub-sample centres (offsets ±¼ px) that lie within `r`.

use atlas_core::query::Bitmask;
use atlas_core::view::Viewport;
use atlas_core::{Error, Result};
use rayon::prelude::*;

use crate::frame::FrameBuffer;
use crate::oit::{accumulate, empty_accumulators, resolve, STRIDE};
use crate::style::PointStyle;

/// Pixel rows per parallel band.
pub const BAND_ROWS: u32 = 32;

const HALF_DIAGONAL: f32 = std::f32::consts::FRAC_1_SQRT_2;
const SUB_OFFSETS: [(f32, f32); 4] = [(0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)];

#[derive(Clone, Copy)]
struct Splat {
    x: f32,
    y: f32,
    rgb: [f32; 3],
}

/// Coverage of pixel `(px, py)` by a disc of radius `r` at `(x, y)`, in `{0, ¼, ½, ¾, 1}`.
#[inline(always)]
pub fn disc_coverage(px: u32, py: u32, x: f32, y: f32, r: f32) -> f32 {
    let dx = px as f32 + 0.5 - x;
    let dy = py as f32 + 0.5 - y;
    let d2 = dx * dx + dy * dy;
    let inner = r - HALF_DIAGONAL;
    if inner > 0.0 && d2 <= inner * inner {
        return 1.0;
    }
    let outer = r + HALF_DIAGONAL;
    if d2 >= outer * outer {
        return 0.0;
    }
    let r2 = r * r;
    let mut hits = 0u32;
    for (ox, oy) in SUB_OFFSETS {
        let sx = px as f32 + ox - x;
        let sy = py as f32 + oy - y;
        hits += u32::from(sx * sx + sy * sy <= r2);
    }
    hits as f32 * 0.25
}

fn splat_band(acc: &mut [f32], width: u32, y0: u32, y1: u32, splats: &[Splat], r: f32, alpha: f32) {
    // pixels whose centre is at least r + √½ away along an axis are never touched
    let outer = r + HALF_DIAGONAL;
    let outer2 = outer * outer;
    let inner = r - HALF_DIAGONAL;
    let inner2 = if inner > 0.0 { inner * inner } else { -1.0 };
    for s in splats {
        let px0 = (s.x - 0.5 - outer).ceil().max(0.0) as u32;
        let px1 = ((s.x - 0.5 + outer).floor() as i64 + 1).clamp(0, width as i64) as u32;
        let py0 = (s.y - 0.5 - outer).ceil().max(y0 as f32) as u32;
        let py1 = ((s.y - 0.5 + outer).floor() as i64 + 1).clamp(y0 as i64, y1 as i64) as u32;
        let r2 = r * r;
        for py in py0..py1 {
            let dy = py as f32 + 0.5 - s.y;
            let dy2 = dy * dy;
            if dy2 >= outer2 {
                continue;
            }
            // sub-sample rows, same arithmetic as `disc_coverage`
            let (ya, yb) = (py as f32 + 0.25 - s.y, py as f32 + 0.75 - s.y);
            let (ya2, yb2) = (ya * ya, yb * yb);
            let row = &mut acc[((py - y0) * width) as usize * STRIDE..((py - y0 + 1) * width) as usize * STRIDE];
            for px in px0..px1 {
                let dx = px as f32 + 0.5 - s.x;
                let d2 = dx * dx + dy2;
                let cov = if d2 <= inner2 {
                    1.0
                } else if d2 >= outer2 {
                    continue;
                } else {
                    let (xa, xb) = (px as f32 + 0.25 - s.x, px as f32 + 0.75 - s.x);
                    let (xa2, xb2) = (xa * xa, xb * xb);
                    let hits = u32::from(xa2 + ya2 <= r2)
                        + u32::from(xb2 + ya2 <= r2)
                        + u32::from(xa2 + yb2 <= r2)
                        + u32::from(xb2 + yb2 <= r2);
                    hits as f32 * 0.25
                };
                if cov > 0.0 {
                    let i = px as usize * STRIDE;
                    accumulate(&mut row[i..i + STRIDE], s.rgb, alpha * cov);
                }
            }
        }
    }
}

/// Splats every masked point with a finite position as a translucent disc and
/// composites with unit-weight OIT. Each band sees its points in input order, so the
/// result is identical however the bands are scheduled.
pub fn rasterize_points(
    points: &[[f64; 2]],
    categories: Option<&[u32]>,
    mask: Option<&Bitmask>,
    viewport: &Viewport,
    style: &PointStyle,
) -> Result<FrameBuffer> {
    style.validate()?;
    viewport.validate()?;
    if categories.is_some_and(|c| c.len() != points.len()) {
        return Err(Error::Param("category codes and points differ in length".into()));
    }
    if mask.is_some_and(|m| m.len() != points.len()) {
        return Err(Error::Param("mask and points differ in length".into()));
    }
    let (w, h) = (viewport.width, viewport.height);
    let r = style.radius;
    let reach = r as f64 + 1.0;
    let bands = h.div_ceil(BAND_ROWS) as usize;

    // counting sort of visible splats into the bands their discs touch
    let mut band_span = Vec::with_capacity(points.len());
    let mut counts = vec![0usize; bands + 1];
    for (i, p) in points.iter().enumerate() {
        if mask.is_some_and(|m| !m.get(i)) {
            continue;
        }
        let [sx, sy] = viewport.to_screen(p[0], p[1]);
        if !(sx > -reach && sx < w as f64 + reach && sy > -reach && sy < h as f64 + reach) {
            continue;
        }
        let b0 = ((sy - reach).max(0.0) as u32 / BAND_ROWS) as usize;
        let b1 = (((sy + reach).min(h as f64 - 1.0)).max(0.0) as u32 / BAND_ROWS) as usize;
        band_span.push((i as u32, sx as f32, sy as f32, b0 as u32, b1 as u32));
        for b in b0..=b1 {
            counts[b + 1] += 1;
        }
    }
    for b in 0..bands {
        counts[b + 1] += counts[b];
    }
    let mut fill = counts.clone();
    let mut splats = vec![
        Splat {
            x: 0.0,
            y: 0.0,
            rgb: [0.0; 3]
        };
        counts[bands]
    ];
    for &(i, x, y, b0, b1) in &band_span {
        let rgb = style.color_of(categories.map(|c| c[i as usize]));
        for b in b0 as usize..=b1 as usize {
            splats[fill[b]] = Splat { x, y, rgb };
            fill[b] += 1;
        }
    }

    let mut acc = empty_accumulators(w as usize * h as usize);
    let band_len = (BAND_ROWS * w) as usize * STRIDE;
    acc.par_chunks_mut(band_len).enumerate().for_each(|(b, chunk)| {
        let y0 = b as u32 * BAND_ROWS;
        let y1 = (y0 + BAND_ROWS).min(h);
        splat_band(chunk, w, y0, y1, &splats[counts[b]..counts[b + 1]], r, style.alpha);
    });
    Ok(resolve(&acc, w, h, style.background))
}
