//! Algorithmic core of the rjoin spatial join engine.
//!
//! This crate is `no_std`-compatible (with `alloc`) and carries no IO:
//! geometry primitives, grid histograms with Jensen-Shannon divergence,
//! the full-coverage quadtree partitioner, dataset metadata embeddings,
//! the twin-branch distance network, the reuse decision forest, and the
//! plane-sweep block join. File formats, the simulated distributed
//! executor, and the CLI live in the companion `rjoin` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod embedding;
pub mod error;
pub mod forest;
pub mod geom;
pub mod histogram;
pub mod nn;
pub mod quadtree;
pub mod sweep;

pub use embedding::{DatasetEmbedding, DatasetMetadata};
pub use error::CoreError;
pub use geom::{Point, Polygon, PolygonMetrics, Rect};
pub use histogram::{GridHistogram, ProbVector};
pub use quadtree::{PartitionBlock, QuadtreePartitioner};
