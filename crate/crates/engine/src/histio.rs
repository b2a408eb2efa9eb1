//! Histogram persistence and the cached ground-truth divergence matrix.

use std::path::Path;

use serde::{Deserialize, Serialize};

use rjoin_core::geom::Rect;
use rjoin_core::histogram::{jsd, GridHistogram};

use crate::dataset::{scan_csv, ScanStats};
use crate::error::Result;
use crate::fsutil;

/// On-disk form of a sparse histogram (JSON cannot key maps by tuples).
#[derive(Debug, Serialize, Deserialize)]
pub struct HistogramFile {
    pub domain: [f64; 4],
    pub resolution: u32,
    pub entries: Vec<(u32, u32, u64)>,
    pub total: u64,
    pub out_of_domain: u64,
}

impl HistogramFile {
    pub fn from_histogram(h: &GridHistogram) -> Self {
        HistogramFile {
            domain: [h.domain.min_x, h.domain.min_y, h.domain.max_x, h.domain.max_y],
            resolution: h.resolution,
            entries: h.bins.iter().map(|(&(r, c), &n)| (r, c, n)).collect(),
            total: h.total,
            out_of_domain: h.out_of_domain,
        }
    }

    pub fn into_histogram(self) -> GridHistogram {
        let mut h = GridHistogram::new(
            Rect::new(self.domain[0], self.domain[1], self.domain[2], self.domain[3]),
            self.resolution,
        );
        h.bins = self.entries.iter().map(|&(r, c, n)| ((r, c), n)).collect();
        h.total = self.total;
        h.out_of_domain = self.out_of_domain;
        h
    }
}

pub fn save_histogram(path: &Path, h: &GridHistogram) -> Result<()> {
    let json = serde_json::to_string(&HistogramFile::from_histogram(h)).expect("serializes");
    fsutil::write_atomic(path, json.as_bytes())
}

pub fn load_histogram(path: &Path) -> Result<GridHistogram> {
    let text = fsutil::read_to_string(path)?;
    let file: HistogramFile = fsutil::parse_json(path, &text)?;
    Ok(file.into_histogram())
}

/// One full pass over the dataset file into a histogram on the shared domain.
pub fn build_histogram_from_file(
    path: &Path,
    domain: Rect,
    resolution: u32,
    scans: &mut ScanStats,
) -> Result<GridHistogram> {
    let mut h = GridHistogram::new(domain, resolution);
    scan_csv(path, scans, |p| h.add(p))?;
    Ok(h)
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct MatrixCache {
    ids: Vec<String>,
    domain: [f64; 4],
    resolution: u32,
    matrix: Vec<Vec<f64>>,
}

/// Symmetric pairwise divergence matrix over `(id, point file)` sources,
/// zero diagonal. When `cache_path` is given and holds a result for the
/// same (ids, domain, resolution) key, the cached matrix is returned
/// without touching the data files.
pub fn ground_truth_matrix(
    sources: &[(String, std::path::PathBuf)],
    domain: Rect,
    resolution: u32,
    cache_path: Option<&Path>,
    scans: &mut ScanStats,
) -> Result<Vec<Vec<f64>>> {
    assert!(sources.len() >= 2);
    let ids: Vec<String> = sources.iter().map(|(id, _)| id.clone()).collect();
    let key = [domain.min_x, domain.min_y, domain.max_x, domain.max_y];
    if let Some(path) = cache_path {
        if path.exists() {
            let text = fsutil::read_to_string(path)?;
            let cache: MatrixCache = fsutil::parse_json(path, &text)?;
            if cache.ids == ids && cache.domain == key && cache.resolution == resolution {
                return Ok(cache.matrix);
            }
        }
    }

    let mut probs = Vec::with_capacity(sources.len());
    for (_, path) in sources {
        let h = build_histogram_from_file(path, domain, resolution, scans)?;
        probs.push(h.normalize()?);
    }
    let n = sources.len();
    let mut matrix = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = jsd(&probs[i], &probs[j])?;
            matrix[i][j] = d;
            matrix[j][i] = d;
        }
    }

    if let Some(path) = cache_path {
        let cache = MatrixCache {
            ids,
            domain: key,
            resolution,
            matrix: matrix.clone(),
        };
        fsutil::write_atomic(path, serde_json::to_string(&cache).expect("serializes").as_bytes())?;
    }
    Ok(matrix)
}
