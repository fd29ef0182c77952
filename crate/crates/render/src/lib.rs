//! Reference CPU rasterizer for the embedding view and its frame-rate benchmark.
//!
//! Points and density layers are composited with unit-weight order-independent
//! transparency, so any draw order gives the same frame up to float rounding.

pub mod bench;
pub mod density;
pub mod frame;
pub mod oit;
pub mod points;
pub mod style;

pub use atlas_core::view::Viewport;
pub use bench::{benchmark, synthetic_points, BenchConfig, BenchReport, BENCH_REPORT_SCHEMA};
pub use density::{density_opacity, render_density, DensityStyle};
pub use frame::FrameBuffer;
pub use oit::{resolve_pixel, OIT_EPSILON};
pub use points::{disc_coverage, rasterize_points};
pub use style::{PointStyle, TABLEAU10};
