//! Engine configuration: a flat `key = value` text file.
//!
//! Unknown keys are rejected so typos surface immediately. Every command
//! writes an effective-config snapshot next to its outputs, including the
//! seeds, so runs are reproducible from the artifacts alone.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rjoin_core::Rect;

use crate::error::{EngineError, Result};

/// Seeds for every randomized stage, recorded in output artifacts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seeds {
    pub ingest: u64,
    pub train: u64,
    pub forest: u64,
    pub workload: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    /// Global universe shared by every histogram and partitioner.
    pub global_domain: Rect,
    pub histogram_resolution: u32,
    pub coord_scale: f64,
    pub workers: usize,
    pub user_max_depth: u32,
    pub sample_cap: usize,
    /// Per-block point cap; exceeding it fails the join (bad reuse signal).
    pub capacity_cap: usize,
    pub seeds: Seeds,
    pub repo_dir: PathBuf,
    pub data_dir: PathBuf,
}

impl Default for EngineConfig {
    fn default() -> Self {
        // default domain is the Web Mercator world extent
        let w = 20_037_508.342_789_244;
        EngineConfig {
            global_domain: Rect::new(-w, -w, w, w),
            histogram_resolution: 8192,
            coord_scale: 1e6,
            workers: 4,
            user_max_depth: 8,
            sample_cap: 10_000,
            capacity_cap: 5_000_000,
            seeds: Seeds {
                ingest: 1,
                train: 2,
                forest: 3,
                workload: 4,
            },
            repo_dir: PathBuf::from("repo"),
            data_dir: PathBuf::from("data"),
        }
    }
}

impl EngineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| EngineError::io(path, e))?;
        let mut cfg = EngineConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(EngineError::Config(format!(
                    "{}:{}: expected `key = value`, got {raw:?}",
                    path.display(),
                    lineno + 1
                )));
            };
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| EngineError::Config(format!("bad {what} value {value:?}"));
        match key {
            "domain" => {
                let parts: Vec<f64> = value
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad("domain"))?;
                if parts.len() != 4 || parts[0] >= parts[2] || parts[1] >= parts[3] {
                    return Err(bad("domain"));
                }
                self.global_domain = Rect::new(parts[0], parts[1], parts[2], parts[3]);
            }
            "histogram_resolution" => {
                self.histogram_resolution = value.parse().map_err(|_| bad(key))?
            }
            "coord_scale" => self.coord_scale = value.parse().map_err(|_| bad(key))?,
            "workers" => self.workers = value.parse().map_err(|_| bad(key))?,
            "user_max_depth" => self.user_max_depth = value.parse().map_err(|_| bad(key))?,
            "sample_cap" => self.sample_cap = value.parse().map_err(|_| bad(key))?,
            "capacity_cap" => self.capacity_cap = value.parse().map_err(|_| bad(key))?,
            "seed_ingest" => self.seeds.ingest = value.parse().map_err(|_| bad(key))?,
            "seed_train" => self.seeds.train = value.parse().map_err(|_| bad(key))?,
            "seed_forest" => self.seeds.forest = value.parse().map_err(|_| bad(key))?,
            "seed_workload" => self.seeds.workload = value.parse().map_err(|_| bad(key))?,
            "repo_dir" => self.repo_dir = PathBuf::from(value),
            "data_dir" => self.data_dir = PathBuf::from(value),
            _ => return Err(EngineError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.histogram_resolution == 0
            || self.coord_scale <= 0.0
            || self.workers == 0
            || self.user_max_depth == 0
            || self.sample_cap < 3
            || self.capacity_cap == 0
        {
            return Err(EngineError::Config(
                "resolution, coord_scale, workers, user_max_depth, capacity_cap must be positive; sample_cap >= 3".into(),
            ));
        }
        Ok(())
    }

    /// Renders the effective config back into the flat file format.
    pub fn render(&self) -> String {
        let d = self.global_domain;
        let mut s = String::new();
        let _ = writeln!(s, "domain = {},{},{},{}", d.min_x, d.min_y, d.max_x, d.max_y);
        let _ = writeln!(s, "histogram_resolution = {}", self.histogram_resolution);
        let _ = writeln!(s, "coord_scale = {}", self.coord_scale);
        let _ = writeln!(s, "workers = {}", self.workers);
        let _ = writeln!(s, "user_max_depth = {}", self.user_max_depth);
        let _ = writeln!(s, "sample_cap = {}", self.sample_cap);
        let _ = writeln!(s, "capacity_cap = {}", self.capacity_cap);
        let _ = writeln!(s, "seed_ingest = {}", self.seeds.ingest);
        let _ = writeln!(s, "seed_train = {}", self.seeds.train);
        let _ = writeln!(s, "seed_forest = {}", self.seeds.forest);
        let _ = writeln!(s, "seed_workload = {}", self.seeds.workload);
        let _ = writeln!(s, "repo_dir = {}", self.repo_dir.display());
        let _ = writeln!(s, "data_dir = {}", self.data_dir.display());
        s
    }

    /// Writes the effective-config snapshot into `dir`.
    pub fn snapshot(&self, dir: &Path) -> Result<()> {
        crate::fsutil::write_atomic(&dir.join("effective-config.txt"), self.render().as_bytes())
    }
}
