//! Partitioner persistence.
//!
//! On disk a partitioner is its leaf set: `{id, domain, max_depth,
//! leaves:[{path, bbox}]}` with paths over 0=NW, 1=NE, 2=SW, 3=SE. Loading
//! reconstructs the tree from the paths and recomputes every bbox from the
//! domain, then cross-checks the stored bboxes, so save -> load -> save is
//! byte-identical and a partitioner built on one machine routes identically
//! on another.

use std::path::Path;

use serde::{Deserialize, Serialize};

use rjoin_core::geom::Rect;
use rjoin_core::QuadtreePartitioner;

use crate::error::{EngineError, Result};
use crate::fsutil;

#[derive(Debug, Serialize, Deserialize)]
struct LeafRecord {
    path: String,
    bbox: [f64; 4],
}

#[derive(Debug, Serialize, Deserialize)]
struct PartitionerFile {
    id: String,
    domain: [f64; 4],
    max_depth: u32,
    leaves: Vec<LeafRecord>,
}

pub fn save_partitioner(path: &Path, p: &QuadtreePartitioner) -> Result<()> {
    let file = PartitionerFile {
        id: p.id.clone(),
        domain: [p.domain.min_x, p.domain.min_y, p.domain.max_x, p.domain.max_y],
        max_depth: p.max_depth,
        leaves: p
            .leaves()
            .iter()
            .map(|l| LeafRecord {
                path: l.path.clone(),
                bbox: [l.bbox.min_x, l.bbox.min_y, l.bbox.max_x, l.bbox.max_y],
            })
            .collect(),
    };
    let json = serde_json::to_string_pretty(&file).expect("partitioner serializes");
    fsutil::write_atomic(path, json.as_bytes())
}

pub fn load_partitioner(path: &Path) -> Result<QuadtreePartitioner> {
    let text = fsutil::read_to_string(path)?;
    let file: PartitionerFile = fsutil::parse_json(path, &text)?;
    let [minx, miny, maxx, maxy] = file.domain;
    if !(minx < maxx && miny < maxy) {
        return Err(EngineError::Format {
            path: path.to_path_buf(),
            msg: format!("degenerate domain {:?}", file.domain),
        });
    }
    let domain = Rect::new(minx, miny, maxx, maxy);
    let paths: Vec<String> = file.leaves.iter().map(|l| l.path.clone()).collect();
    let p = QuadtreePartitioner::from_leaf_paths(&file.id, domain, file.max_depth, &paths)
        .map_err(|e| EngineError::Format {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
    // stored bboxes must match the recomputed subdivision bit-exactly
    for (leaf, rec) in p.leaves().iter().zip(&file.leaves) {
        let expect = [leaf.bbox.min_x, leaf.bbox.min_y, leaf.bbox.max_x, leaf.bbox.max_y];
        if rec.bbox != expect {
            return Err(EngineError::Format {
                path: path.to_path_buf(),
                msg: format!("leaf {:?}: bbox {:?} does not match subdivision", rec.path, rec.bbox),
            });
        }
    }
    Ok(p)
}
