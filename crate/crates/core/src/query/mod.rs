//! Filtering, cross-filter selection state and binned aggregation.

mod aggregate;
mod bitmask;
mod predicate;
mod selection;

pub use aggregate::{
    bin_edge, box_stats, boxplot, choose_scale, heatmap2d, histogram1d, quantile_type7, uniform_bin, BinSpec, Bins, BoxStats,
    ClassCount, GroupBox, Heatmap, Histogram, InvalidCounts, Scale, DEFAULT_HISTOGRAM_BINS, MAX_HEATMAP_BINS,
};
pub use bitmask::Bitmask;
pub use predicate::{evaluate, point_in_polygon, InvalidClass, Predicate, PREDICATE_ENCODING_VERSION};
pub use selection::SelectionContext;
