//! Model and forest checkpoints (JSON, atomic writes).

use std::path::Path;

use serde::{Deserialize, Serialize};

use rjoin_core::embedding::FEATURE_ORDER;
use rjoin_core::forest::DecisionForest;
use rjoin_core::nn::{Affine, SiameseModel};

use crate::error::{EngineError, Result};
use crate::fsutil;

#[derive(Debug, Serialize, Deserialize)]
struct LayerRecord {
    in_dim: usize,
    out_dim: usize,
    w: Vec<f64>,
    b: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    /// Embedding layout tag; a checkpoint is never applied to vectors with
    /// a different layout.
    feature_order: String,
    coord_scale: f64,
    seed: u64,
    layers: Vec<LayerRecord>,
}

pub fn save_model(path: &Path, model: &SiameseModel, coord_scale: f64) -> Result<()> {
    let file = ModelFile {
        feature_order: FEATURE_ORDER.to_string(),
        coord_scale,
        seed: model.rng_seed,
        layers: model
            .layers
            .iter()
            .map(|l| LayerRecord {
                in_dim: l.in_dim,
                out_dim: l.out_dim,
                w: l.w.clone(),
                b: l.b.clone(),
            })
            .collect(),
    };
    let json = serde_json::to_string(&file).expect("model serializes");
    fsutil::write_atomic(path, json.as_bytes())
}

/// Loads a model checkpoint; returns the model and its coord_scale, which
/// callers must honor when embedding query datasets.
pub fn load_model(path: &Path) -> Result<(SiameseModel, f64)> {
    let text = fsutil::read_to_string(path)?;
    let file: ModelFile = fsutil::parse_json(path, &text)?;
    if file.feature_order != FEATURE_ORDER {
        return Err(EngineError::Format {
            path: path.to_path_buf(),
            msg: format!("feature order {:?} not supported", file.feature_order),
        });
    }
    let layers: Vec<Affine> = file
        .layers
        .into_iter()
        .map(|l| Affine {
            in_dim: l.in_dim,
            out_dim: l.out_dim,
            w: l.w,
            b: l.b,
        })
        .collect();
    let model = SiameseModel::from_layers(layers, file.seed)?;
    Ok((model, file.coord_scale))
}

#[derive(Debug, Serialize, Deserialize)]
struct ForestFile {
    forest: DecisionForest,
}

pub fn save_forest(path: &Path, forest: &DecisionForest) -> Result<()> {
    let json = serde_json::to_string(&ForestFile {
        forest: forest.clone(),
    })
    .expect("forest serializes");
    fsutil::write_atomic(path, json.as_bytes())
}

pub fn load_forest(path: &Path) -> Result<DecisionForest> {
    let text = fsutil::read_to_string(path)?;
    let file: ForestFile = fsutil::parse_json(path, &text)?;
    Ok(file.forest)
}
