//! Dataset metadata and its 9-dimensional embedding vector.
//!
//! Feature order is fixed and recorded in model checkpoints:
//! `[log_count, log_area, cx, cy, bminx, bminy, bmaxx, bmaxy, compactness]`.
//! Count and area use `ln(1 + v)`; centroid and bbox coordinates divide
//! by `coord_scale` (10^6 for projected CRS coordinates, 1 for small
//! local frames).

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::geom::{self, Point, Polygon, Rect};

/// Tag stored in checkpoints so a model is never applied to vectors with
/// a different layout.
pub const FEATURE_ORDER: &str = "log_count,log_area,cx,cy,bminx,bminy,bmaxx,bmaxy,compactness";

/// Metadata extracted from a dataset's ingest sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMetadata {
    pub n_points: u64,
    /// Convex hull of the ingest sample (the polygon covering).
    pub covering: Polygon,
    pub area: f64,
    pub centroid: Point,
    pub bbox: Rect,
    pub compactness: f64,
}

impl DatasetMetadata {
    /// Computes metadata from a sample; `n_points` is the full dataset
    /// count, which may exceed the sample size.
    pub fn from_sample(n_points: u64, sample: &[Point]) -> Result<Self, CoreError> {
        let covering = geom::convex_hull(sample)?;
        let m = geom::polygon_metrics(&covering)?;
        let bbox = Rect::bounding(sample)?;
        Ok(DatasetMetadata {
            n_points,
            covering,
            area: m.area,
            centroid: m.centroid,
            bbox,
            compactness: m.compactness,
        })
    }
}

/// The normalized 9-vector consumed by the distance network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEmbedding {
    pub source_id: alloc::string::String,
    pub v: [f64; 9],
}

/// Builds the embedding vector from metadata.
pub fn embed(source_id: &str, m: &DatasetMetadata, coord_scale: f64) -> DatasetEmbedding {
    debug_assert!(coord_scale > 0.0);
    let s = coord_scale;
    DatasetEmbedding {
        source_id: source_id.into(),
        v: [
            libm::log(1.0 + m.n_points as f64),
            libm::log(1.0 + m.area),
            m.centroid.x / s,
            m.centroid.y / s,
            m.bbox.min_x / s,
            m.bbox.min_y / s,
            m.bbox.max_x / s,
            m.bbox.max_y / s,
            m.compactness,
        ],
    }
}
