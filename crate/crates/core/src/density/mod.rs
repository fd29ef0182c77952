//! Binned kernel density estimation with a recursive Gaussian and isoline extraction.

mod contour;
mod deriche;
mod field;

pub use contour::{contours, isolines, ContourLevel, ContourSet, Polyline};
pub use deriche::{blur_2d, filter_line, reflect_index, DericheCoefficients, LineScratch};
pub use field::{
    bin_points, decode_tile, encode_tile, kde, smooth_deriche, CountGrid, DensityField, Extent, TILE_HEADER_LEN,
};

/// Default kernel σ in grid cells.
pub const DEFAULT_BANDWIDTH: f64 = 8.0;
