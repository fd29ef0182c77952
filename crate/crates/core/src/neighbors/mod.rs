//! Exact nearest-neighbour search in the 2D projection and in vector space, plus substring search.

mod kdtree;
mod search;
mod vector;

pub use kdtree::{Neighbor, SpatialIndex2D, DEFAULT_LEAF_SIZE};
pub use search::text_search;
pub use vector::VectorIndex;
