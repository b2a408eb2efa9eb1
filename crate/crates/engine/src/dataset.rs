//! Dataset ingestion, the instrumented CSV scanner, synthetic enlargement,
//! and workload construction.
//!
//! The file format is CSV with two float columns `x,y`, an optional header
//! row, and blank lines skipped. Every full scan of a file goes through
//! [`scan_csv`], which bumps a per-path pass counter so data-pass claims
//! are assertable rather than assumed.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use rjoin_core::embedding::DatasetMetadata;
use rjoin_core::geom::Point;
use rjoin_core::GridHistogram;

use crate::error::{EngineError, Result};

/// Pass counter keyed by file path; shared by every scanning operation so
/// tests and join stats can count how often each input was read.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct ScanStats {
    passes: BTreeMap<PathBuf, u32>,
}

impl ScanStats {
    pub fn passes(&self, path: &Path) -> u32 {
        self.passes.get(path).copied().unwrap_or(0)
    }

    fn record(&mut self, path: &Path) {
        *self.passes.entry(path.to_path_buf()).or_insert(0) += 1;
    }
}

/// One full pass over a CSV point file, invoking `f` per valid point.
/// Returns the record count.
pub fn scan_csv(
    path: &Path,
    scans: &mut ScanStats,
    mut f: impl FnMut(Point),
) -> Result<u64> {
    let file = std::fs::File::open(path).map_err(|e| EngineError::io(path, e))?;
    let reader = BufReader::new(file);
    let mut count = 0u64;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| EngineError::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        match parse_row(trimmed) {
            Some(p) => {
                count += 1;
                f(p);
            }
            // a non-numeric first row is a header
            None if lineno == 0 => {}
            None => {
                return Err(EngineError::Parse {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    msg: format!("expected `x,y` floats, got {trimmed:?}"),
                });
            }
        }
    }
    scans.record(path);
    Ok(count)
}

fn parse_row(row: &str) -> Option<Point> {
    let (xs, ys) = row.split_once(',')?;
    let x: f64 = xs.trim().parse().ok()?;
    let y: f64 = ys.trim().parse().ok()?;
    if x.is_finite() && y.is_finite() {
        Some(Point::new(x, y))
    } else {
        None
    }
}

pub fn write_csv(path: &Path, points: &[Point]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| EngineError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for p in points {
        writeln!(w, "{},{}", p.x, p.y).map_err(|e| EngineError::io(path, e))?;
    }
    w.flush().map_err(|e| EngineError::io(path, e))
}

/// A named point dataset: file location, record count, the seeded ingest
/// sample, and the metadata derived from that sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub id: String,
    pub path: PathBuf,
    pub count: u64,
    pub sample: Vec<Point>,
    pub metadata: DatasetMetadata,
}

/// Reads the file once, reservoir-sampling `sample_cap` points, and
/// computes metadata from the sample's convex hull.
pub fn ingest(
    path: &Path,
    id: &str,
    sample_cap: usize,
    seed: u64,
    scans: &mut ScanStats,
) -> Result<Dataset> {
    assert!(sample_cap >= 3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample: Vec<Point> = Vec::with_capacity(sample_cap.min(4096));
    let mut seen = 0u64;
    let count = scan_csv(path, scans, |p| {
        if (seen as usize) < sample_cap {
            sample.push(p);
        } else {
            let j = rng.random_range(0..=seen);
            if (j as usize) < sample_cap {
                sample[j as usize] = p;
            }
        }
        seen += 1;
    })?;
    let metadata = DatasetMetadata::from_sample(count, &sample)?;
    Ok(Dataset {
        id: id.to_string(),
        path: path.to_path_buf(),
        count,
        sample,
        metadata,
    })
}

/// Metadata sidecar persisted next to the repository so later commands can
/// rebuild a `Dataset` without rescanning the file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetSidecar {
    pub id: String,
    pub path: String,
    pub count: u64,
    pub area: f64,
    pub centroid: [f64; 2],
    pub bbox: [f64; 4],
    pub compactness: f64,
    pub hull: Vec<[f64; 2]>,
    pub ingest_seed: u64,
}

impl DatasetSidecar {
    pub fn from_dataset(d: &Dataset, ingest_seed: u64) -> Self {
        let m = &d.metadata;
        DatasetSidecar {
            id: d.id.clone(),
            path: d.path.display().to_string(),
            count: d.count,
            area: m.area,
            centroid: [m.centroid.x, m.centroid.y],
            bbox: [m.bbox.min_x, m.bbox.min_y, m.bbox.max_x, m.bbox.max_y],
            compactness: m.compactness,
            hull: m.covering.vertices().iter().map(|p| [p.x, p.y]).collect(),
            ingest_seed,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("sidecar serializes");
        crate::fsutil::write_atomic(path, json.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = crate::fsutil::read_to_string(path)?;
        crate::fsutil::parse_json(path, &text)
    }

    /// Rebuilds the dataset view (sample omitted; metadata from the sidecar).
    pub fn into_dataset(self) -> Result<Dataset> {
        let hull: Vec<Point> = self.hull.iter().map(|&[x, y]| Point::new(x, y)).collect();
        let covering = rjoin_core::geom::convex_hull(&hull)?;
        Ok(Dataset {
            id: self.id,
            path: PathBuf::from(self.path),
            count: self.count,
            sample: Vec::new(),
            metadata: DatasetMetadata {
                n_points: self.count,
                covering,
                area: self.area,
                centroid: Point::new(self.centroid[0], self.centroid[1]),
                bbox: rjoin_core::Rect::new(self.bbox[0], self.bbox[1], self.bbox[2], self.bbox[3]),
                compactness: self.compactness,
            },
        })
    }
}

/// Draws `target` i.i.d. points from the histogram: bin chosen with
/// probability proportional to its count, position uniform within the bin.
pub fn synthesize_points(hist: &GridHistogram, target: u64, seed: u64) -> Vec<Point> {
    assert!(hist.total > 0);
    let keys: Vec<(u32, u32)> = hist.bins.keys().copied().collect();
    let weights: Vec<u64> = hist.bins.values().copied().collect();
    let dist = WeightedIndex::new(&weights).expect("non-empty histogram");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cell_w = hist.domain.width() / hist.resolution as f64;
    let cell_h = hist.domain.height() / hist.resolution as f64;
    (0..target)
        .map(|_| {
            let (row, col) = keys[dist.sample(&mut rng)];
            let x0 = hist.domain.min_x + col as f64 * cell_w;
            let y0 = hist.domain.min_y + row as f64 * cell_h;
            Point::new(
                rng.random_range(x0..x0 + cell_w),
                rng.random_range(y0..y0 + cell_h),
            )
        })
        .collect()
}

/// Builds a synthetic dataset of `target_count` points that preserves the
/// source's bin-level spatial distribution, writes it to `out_path`, and
/// ingests it under `id`.
pub fn enlarge(
    d: &Dataset,
    target_count: u64,
    resolution: u32,
    seed: u64,
    out_path: &Path,
    id: &str,
    sample_cap: usize,
    scans: &mut ScanStats,
) -> Result<Dataset> {
    assert!(target_count >= d.count);
    // histogram over the source's own bbox so empty world space does not
    // wash out the distribution
    let mut hist = GridHistogram::new(d.metadata.bbox, resolution);
    scan_csv(&d.path, scans, |p| hist.add(p))?;
    let points = synthesize_points(&hist, target_count, seed);
    write_csv(out_path, &points)?;
    ingest(out_path, id, sample_cap, seed, scans)
}

/// Seeded disjoint split; both sides non-empty, test side floored.
pub fn split_workload<T: Clone>(items: &[T], train_fraction: f64, seed: u64) -> (Vec<T>, Vec<T>) {
    assert!(items.len() >= 2);
    assert!(train_fraction > 0.0 && train_fraction < 1.0);
    let mut idx: Vec<usize> = (0..items.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let train_n = ((items.len() as f64 * train_fraction).floor() as usize)
        .max(1)
        .min(items.len() - 1);
    let (test_idx, train_idx) = idx.split_at(items.len() - train_n);
    let pick = |ids: &[usize]| ids.iter().map(|&i| items[i].clone()).collect();
    (pick(train_idx), pick(test_idx))
}

/// Random join pairs: one pair per dataset (as the left side) against a
/// random other dataset, so every dataset appears at least once and
/// `|pairs| = |datasets|`.
pub fn pair_joins(ids: &[String], seed: u64) -> Vec<(String, String)> {
    assert!(ids.len() >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.shuffle(&mut rng);
    order
        .into_iter()
        .map(|left| {
            let mut right = rng.random_range(0..ids.len() - 1);
            if right >= left {
                right += 1;
            }
            (ids[left].clone(), ids[right].clone())
        })
        .collect()
}
