//! Persistent store of {embedding, partitioner} entries plus the model and
//! forest checkpoints, with the vectorized best-match lookup of the online
//! phase.
//!
//! Layout under the repository directory:
//!   manifest.json            entry list + checkpoint refs
//!   partitioners/<id>.json   stored partitioners
//!   models/                  model + forest checkpoints
//!   decisions.log            JSON-lines decision traces
//!
//! Manifest paths are stored relative to the repository directory so two
//! repositories built with the same seeds are byte-identical regardless of
//! where they live. `created_at` is a logical sequence number, not wall
//! time, for the same reason.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use rjoin_core::embedding::DatasetEmbedding;
use rjoin_core::nn::SiameseModel;

use crate::error::{EngineError, Result};
use crate::fsutil;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub dataset_id: String,
    pub embedding: [f64; 9],
    /// Relative to the repository directory.
    pub partitioner_path: String,
    /// Source point file, needed for retraining; stored as given.
    pub data_path: String,
    /// Logical insertion sequence number.
    pub created_at: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RepositoryManifest {
    pub entries: Vec<ManifestEntry>,
    pub model_ref: Option<String>,
    pub forest_ref: Option<String>,
}

pub struct Repository {
    pub dir: PathBuf,
    pub manifest: RepositoryManifest,
    /// dataset_id -> feature-space image of the stored embedding, filled on
    /// first model application and dropped on retrain.
    feature_cache: HashMap<String, Vec<f64>>,
}

impl Repository {
    pub fn open(dir: &Path) -> Result<Self> {
        fsutil::create_dir_all(&dir.join("partitioners"))?;
        fsutil::create_dir_all(&dir.join("models"))?;
        let manifest_path = dir.join("manifest.json");
        let manifest = if manifest_path.exists() {
            let text = fsutil::read_to_string(&manifest_path)?;
            fsutil::parse_json(&manifest_path, &text)?
        } else {
            RepositoryManifest::default()
        };
        Ok(Repository {
            dir: dir.to_path_buf(),
            manifest,
            feature_cache: HashMap::new(),
        })
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.dir.join("manifest.json")
    }

    pub fn save(&self) -> Result<()> {
        let json = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        fsutil::write_atomic(&self.manifest_path(), json.as_bytes())
    }

    pub fn abs(&self, rel: &str) -> PathBuf {
        self.dir.join(rel)
    }

    pub fn entry(&self, dataset_id: &str) -> Option<&ManifestEntry> {
        self.manifest.entries.iter().find(|e| e.dataset_id == dataset_id)
    }

    /// Appends an entry and rewrites the manifest atomically.
    pub fn add(
        &mut self,
        dataset_id: &str,
        embedding: &DatasetEmbedding,
        partitioner_rel: &str,
        data_path: &str,
    ) -> Result<()> {
        if self.entry(dataset_id).is_some() {
            return Err(EngineError::DuplicateId(dataset_id.to_string()));
        }
        let abs = self.abs(partitioner_rel);
        if !abs.exists() {
            return Err(EngineError::Format {
                path: abs,
                msg: "partitioner file missing".into(),
            });
        }
        let created_at = self
            .manifest
            .entries
            .iter()
            .map(|e| e.created_at + 1)
            .max()
            .unwrap_or(0);
        self.manifest.entries.push(ManifestEntry {
            dataset_id: dataset_id.to_string(),
            embedding: embedding.v,
            partitioner_path: partitioner_rel.to_string(),
            data_path: data_path.to_string(),
            created_at,
        });
        self.save()
    }

    /// Drops cached feature vectors; required after a model swap.
    pub fn invalidate_features(&mut self) {
        self.feature_cache.clear();
    }

    /// Highest similarity between either query embedding and any stored
    /// entry, with the winning entry index. Similarity is `1 - d_hat` where
    /// `d_hat` is the model's clamped feature distance. Ties break to the
    /// higher similarity, then the lexicographically smallest dataset id.
    pub fn best_match(
        &mut self,
        r_emb: &DatasetEmbedding,
        s_emb: &DatasetEmbedding,
        model: &SiameseModel,
    ) -> Result<(f64, usize)> {
        self.best_match_excluding(r_emb, s_emb, model, &[])
    }

    /// As [`best_match`](Self::best_match) but skipping the named entries.
    /// Used during offline label collection, where the query's own
    /// partitioner is always stored and would otherwise pin every score
    /// at 1.
    pub fn best_match_excluding(
        &mut self,
        r_emb: &DatasetEmbedding,
        s_emb: &DatasetEmbedding,
        model: &SiameseModel,
        exclude: &[&str],
    ) -> Result<(f64, usize)> {
        if self
            .manifest
            .entries
            .iter()
            .all(|e| exclude.contains(&e.dataset_id.as_str()))
        {
            return Err(EngineError::EmptyRepository);
        }
        let fr = model.forward(r_emb);
        let fs = model.forward(s_emb);
        let mut best: Option<(f64, usize)> = None;
        for (idx, entry) in self.manifest.entries.iter().enumerate() {
            if exclude.contains(&entry.dataset_id.as_str()) {
                continue;
            }
            let fe = self
                .feature_cache
                .entry(entry.dataset_id.clone())
                .or_insert_with(|| {
                    model.forward(&DatasetEmbedding {
                        source_id: entry.dataset_id.clone(),
                        v: entry.embedding,
                    })
                });
            let sim_of = |f: &[f64]| {
                let d = l2(f, fe);
                1.0 - d / (1.0 + d)
            };
            let sim = sim_of(&fr).max(sim_of(&fs));
            let better = match best {
                None => true,
                Some((s, i)) => {
                    sim > s
                        || (sim == s
                            && self.manifest.entries[i].dataset_id > entry.dataset_id)
                }
            };
            if better {
                best = Some((sim, idx));
            }
        }
        Ok(best.expect("at least one non-excluded entry"))
    }
}

fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Exclusive per-repository lock: one pipeline command at a time.
pub struct RepoLock {
    path: PathBuf,
}

impl RepoLock {
    pub fn acquire(repo_dir: &Path) -> Result<Self> {
        fsutil::create_dir_all(repo_dir)?;
        let path = repo_dir.join(".lock");
        match std::fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
        {
            Ok(_) => Ok(RepoLock { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(EngineError::Locked(path))
            }
            Err(e) => Err(EngineError::io(&path, e)),
        }
    }
}

impl Drop for RepoLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}
