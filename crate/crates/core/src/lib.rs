//! Columnar storage, cross-filter queries, density estimation, clustering,
//! label placement and neighbour search for large 2D point embeddings.

pub mod clustering;
pub mod data;
pub mod density;
pub mod error;
pub mod labeling;
pub mod neighbors;
pub mod projection;
pub mod query;
pub mod view;

pub use error::{Error, Position, Result};
