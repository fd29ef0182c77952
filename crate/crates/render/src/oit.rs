//! Weighted-blended order-independent transparency with unit weights.
//!
//! Per pixel the layers accumulate `C = Σ αᵢ·cᵢ`, `A = Σ αᵢ` and the revealage
//! `R = Π(1 − αᵢ)`. The resolved colour is `C / max(A, ε)·(1 − R) + background·R`.
//! Sums and products commute, so draw order only changes float rounding.

use rayon::prelude::*;

use crate::frame::FrameBuffer;

pub const OIT_EPSILON: f32 = 1e-6;

/// Revealage below this is stored as zero.
pub const REVEALAGE_FLOOR: f32 = 1e-30;

/// Floats per pixel: r, g, b, alpha sum, revealage.
pub(crate) const STRIDE: usize = 5;

/// Adds one layer to a pixel accumulator.
#[inline(always)]
pub(crate) fn accumulate(px: &mut [f32], rgb: [f32; 3], alpha: f32) {
    px[0] += alpha * rgb[0];
    px[1] += alpha * rgb[1];
    px[2] += alpha * rgb[2];
    px[3] += alpha;
    // flush before subnormals: they are slow and change the output by < 1e-30
    let r = px[4] * (1.0 - alpha);
    px[4] = if r < REVEALAGE_FLOOR { 0.0 } else { r };
}

/// Resolves one accumulator against the background, clamped to `[0, 1]`.
#[inline]
pub fn resolve_pixel(acc: &[f32], background: [f32; 4]) -> [f32; 4] {
    if acc[3] == 0.0 {
        return background;
    }
    let (a, r) = (acc[3].max(OIT_EPSILON), acc[4]);
    let c = |k: usize| clamp01(acc[k] / a * (1.0 - r) + background[k] * r);
    [c(0), c(1), c(2), clamp01((1.0 - r) + background[3] * r)]
}

#[inline]
fn clamp01(v: f32) -> f32 {
    // NaN compares false both ways and maps to 0
    if v > 0.0 {
        v.min(1.0)
    } else {
        0.0
    }
}

/// Fresh accumulators: no colour, revealage one.
pub(crate) fn empty_accumulators(pixels: usize) -> Vec<f32> {
    let mut acc = vec![0.0f32; pixels * STRIDE];
    for px in acc.chunks_exact_mut(STRIDE) {
        px[4] = 1.0;
    }
    acc
}

pub(crate) fn resolve(acc: &[f32], width: u32, height: u32, background: [f32; 4]) -> FrameBuffer {
    let mut data = vec![0.0f32; width as usize * height as usize * 4];
    data.par_chunks_mut(4 * width as usize)
        .zip(acc.par_chunks(STRIDE * width as usize))
        .for_each(|(out, row)| {
            for (o, a) in out.chunks_exact_mut(4).zip(row.chunks_exact(STRIDE)) {
                o.copy_from_slice(&resolve_pixel(a, background));
            }
        });
    FrameBuffer::from_raw(width, height, data)
}
