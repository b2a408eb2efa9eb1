//! Shared fixtures for the integration tests: configs rooted in a temp
//! directory, seeded synthetic point files, and the nested-loop oracle.

#![allow(dead_code)]

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rjoin::config::{EngineConfig, Seeds};
use rjoin::dataset::{self, Dataset, ScanStats};
use rjoin_core::geom::{Point, Rect};

pub const DOMAIN: Rect = Rect {
    min_x: 0.0,
    min_y: 0.0,
    max_x: 1000.0,
    max_y: 1000.0,
};

/// Config rooted under `root`, sized for fast tests.
pub fn test_cfg(root: &Path) -> EngineConfig {
    let cfg = EngineConfig {
        global_domain: DOMAIN,
        histogram_resolution: 64,
        coord_scale: 1000.0,
        workers: 2,
        user_max_depth: 6,
        sample_cap: 2000,
        capacity_cap: 5_000_000,
        seeds: Seeds {
            ingest: 1,
            train: 2,
            forest: 3,
            workload: 4,
        },
        repo_dir: root.join("repo"),
        data_dir: root.join("data"),
    };
    std::fs::create_dir_all(&cfg.repo_dir).unwrap();
    std::fs::create_dir_all(&cfg.data_dir).unwrap();
    cfg
}

/// Uniform square cluster around (cx, cy), clipped to the test domain.
pub fn cluster_points(seed: u64, n: usize, cx: f64, cy: f64, spread: f64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x = (cx + rng.random_range(-spread..spread)).clamp(DOMAIN.min_x, DOMAIN.max_x);
            let y = (cy + rng.random_range(-spread..spread)).clamp(DOMAIN.min_y, DOMAIN.max_y);
            Point::new(x, y)
        })
        .collect()
}

/// Writes the points under `data_dir/<id>.csv` and ingests them.
pub fn write_dataset(cfg: &EngineConfig, id: &str, points: &[Point]) -> Dataset {
    let path = cfg.data_dir.join(format!("{id}.csv"));
    dataset::write_csv(&path, points).unwrap();
    let mut scans = ScanStats::default();
    dataset::ingest(&path, id, cfg.sample_cap, cfg.seeds.ingest, &mut scans).unwrap()
}

/// Sorted nested-loop oracle over the full files of two datasets.
pub fn oracle_pairs(r: &Dataset, s: &Dataset, theta: f64) -> Vec<(usize, usize)> {
    let mut scans = ScanStats::default();
    let mut r_pts = Vec::new();
    dataset::scan_csv(&r.path, &mut scans, |p| r_pts.push(p)).unwrap();
    let mut s_pts = Vec::new();
    dataset::scan_csv(&s.path, &mut scans, |p| s_pts.push(p)).unwrap();
    let mut pairs = rjoin_core::sweep::nested_loop_join(&r_pts, &s_pts, theta);
    pairs.sort_unstable();
    pairs
}

/// Forest fit on cleanly separable samples (reuse pays off above
/// `threshold`), so decision outcomes in tests are not timing-dependent.
pub fn decisive_forest(threshold: f64, seed: u64) -> rjoin_core::forest::DecisionForest {
    use rjoin_core::forest::DecisionSample;
    let samples: Vec<DecisionSample> = (0..200)
        .map(|i| {
            let sim = i as f64 / 199.0;
            let (t1, t2) = if sim > threshold { (1.0, 2.0) } else { (2.0, 1.0) };
            DecisionSample::new(sim, t1, t2)
        })
        .collect();
    rjoin_core::forest::fit(&samples, 100, 5, seed)
}
