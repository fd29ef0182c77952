//! Density-peak clustering on a smoothed grid with class-based TF-IDF labels.

mod model;
mod peaks;
mod summary;

pub use model::{build_multiresolution, cluster_level, ClusterLevel, ClusterModel, ClusterParams, ClusterSummary, TextSource};
pub use peaks::{
    assign_cells, assign_points, find_peaks, is_strict_local_max, noise_threshold, Peak, DEFAULT_MIN_SEPARATION,
    DEFAULT_NOISE_QUANTILE, MIN_PEAK_POINTS, POSITIVE_FLOOR,
};
pub use summary::{
    fallback_label, stopwords, summarize_cluster, summarize_clusters, term_scores, tokenize, top_terms, DEFAULT_TOP_K,
    MIN_TOKEN_CHARS,
};
