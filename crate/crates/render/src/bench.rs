//! Frame-rate benchmark over seeded synthetic data.
//!
//! The generator draws `GENERATOR_COMPONENTS` isotropic Gaussian components with
//! centres uniform in `[-10, 10]²` and standard deviations uniform in `[0.3, 1.5]`.
//! Each point picks a component uniformly, then gets a category uniform in
//! `0..categories`, independent of the component. Everything derives from one
//! ChaCha8 seed.
//!
//! The camera script runs one period of a smooth zoom-and-pan loop: zoom swings
//! from the fit-to-data level up to four times that and back, while the centre
//! circles the data centre with a radius of a quarter of the data span.

use std::time::Instant;

use atlas_core::view::Viewport;
use atlas_core::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::points::rasterize_points;
use crate::style::PointStyle;

pub const GENERATOR_COMPONENTS: usize = 16;
pub const DEFAULT_SEED: u64 = 0x5eed;

/// JSON Schema of [`BenchReport`].
pub const BENCH_REPORT_SCHEMA: &str = include_str!("../bench_report.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub points: usize,
    pub categories: u32,
    pub frames: usize,
    pub width: u32,
    pub height: u32,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            points: 100_000,
            categories: 8,
            frames: 60,
            width: 800,
            height: 800,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchReport {
    pub mean_fps: f64,
    /// 5th percentile of per-frame rates (nearest rank).
    pub p5_fps: f64,
    pub frame_times_ms: Vec<f64>,
}

impl BenchReport {
    pub fn from_frame_times(frame_times_ms: Vec<f64>) -> Self {
        let n = frame_times_ms.len();
        let total: f64 = frame_times_ms.iter().sum();
        let mean_fps = if total > 0.0 { n as f64 * 1000.0 / total } else { f64::INFINITY };
        let mut rates: Vec<f64> = frame_times_ms
            .iter()
            .map(|ms| if *ms > 0.0 { 1000.0 / ms } else { f64::INFINITY })
            .collect();
        rates.sort_by(f64::total_cmp);
        let rank = ((0.05 * n as f64).ceil() as usize).clamp(1, n.max(1));
        let p5_fps = rates.get(rank - 1).copied().unwrap_or(0.0);
        BenchReport {
            mean_fps,
            p5_fps,
            frame_times_ms,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Seeded Gaussian-mixture positions and uniform category codes.
pub fn synthetic_points(n: usize, categories: u32, seed: u64) -> (Vec<[f64; 2]>, Vec<u32>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let components: Vec<([f64; 2], Normal<f64>)> = (0..GENERATOR_COMPONENTS)
        .map(|_| {
            let c = [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)];
            (c, Normal::new(0.0, rng.random_range(0.3..1.5)).expect("positive sd"))
        })
        .collect();
    let mut pts = Vec::with_capacity(n);
    let mut cats = Vec::with_capacity(n);
    for _ in 0..n {
        let (c, d) = &components[rng.random_range(0..GENERATOR_COMPONENTS)];
        pts.push([c[0] + d.sample(&mut rng), c[1] + d.sample(&mut rng)]);
        cats.push(rng.random_range(0..categories.max(1)));
    }
    (pts, cats)
}

/// Viewport for `frame` of `frames` over data spanning `[lo, hi]` on both axes.
pub fn camera(frame: usize, frames: usize, lo: [f64; 2], hi: [f64; 2], width: u32, height: u32) -> Viewport {
    let t = frame as f64 / frames.max(1) as f64;
    let phase = std::f64::consts::TAU * t;
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
    let fit = width.min(height) as f64 / span;
    let zoom = fit * 4f64.powf((1.0 - phase.cos()) / 2.0);
    let mid = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
    let r = span / 4.0;
    Viewport {
        center: [mid[0] + r * (phase.cos() - 1.0), mid[1] + r * phase.sin()],
        zoom,
        width,
        height,
    }
}

/// Renders `config.frames` frames of the camera script and reports wall-clock rates.
/// Data generation is outside the timed region.
pub fn benchmark(config: &BenchConfig) -> Result<BenchReport> {
    if config.points == 0 {
        return Err(Error::Param("benchmark needs at least one point".into()));
    }
    if config.frames == 0 || config.width == 0 || config.height == 0 {
        return Err(Error::Param("benchmark needs frames and a non-empty viewport".into()));
    }
    let (pts, cats) = synthetic_points(config.points, config.categories, config.seed);
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &pts {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let style = PointStyle::default();
    let mut times = Vec::with_capacity(config.frames);
    for f in 0..config.frames {
        let vp = camera(f, config.frames, lo, hi, config.width, config.height);
        let start = Instant::now();
        let frame = rasterize_points(&pts, Some(&cats), None, &vp, &style)?;
        std::hint::black_box(&frame);
        times.push(start.elapsed().as_secs_f64() * 1000.0);
    }
    Ok(BenchReport::from_frame_times(times))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_and_mean() {
        let r = BenchReport::from_frame_times(vec![10.0, 20.0, 40.0, 10.0]);
        assert!((r.mean_fps - 4000.0 / 80.0).abs() < 1e-12);
        assert_eq!(r.p5_fps, 25.0);
    }

    #[test]
    fn generator_is_seeded() {
        assert_eq!(synthetic_points(100, 3, 7), synthetic_points(100, 3, 7));
        assert_ne!(synthetic_points(100, 3, 7).0, synthetic_points(100, 3, 8).0);
        assert!(synthetic_points(1000, 3, 1).1.iter().all(|c| *c < 3));
    }

    #[test]
    fn camera_loops() {
        let a = camera(0, 10, [0.0, 0.0], [10.0, 10.0], 100, 100);
        let b = camera(10, 10, [0.0, 0.0], [10.0, 10.0], 100, 100);
        assert!((a.zoom - b.zoom).abs() < 1e-9);
        assert!((a.zoom - 10.0).abs() < 1e-9);
        let mid = camera(5, 10, [0.0, 0.0], [10.0, 10.0], 100, 100);
        assert!((mid.zoom - 40.0).abs() < 1e-9);
    }
}
