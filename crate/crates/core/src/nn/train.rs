use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::model::SiameseModel;
use crate::error::CoreError;

/// One training example: two embedding vectors and their ground-truth
/// JSD distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainPair {
    pub a: [f64; 9],
    pub b: [f64; 9],
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr_grid: Vec<f64>,
    pub weight_decay_grid: Vec<f64>,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub folds: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr_grid: alloc::vec![0.0001, 0.0003, 0.001, 0.003, 0.01],
            weight_decay_grid: alloc::vec![0.0, 0.0001],
            batch_size: 24,
            max_epochs: 50,
            patience: 10,
            folds: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub chosen_lr: f64,
    pub chosen_weight_decay: f64,
    /// (lr, weight_decay, mean validation MSE) per grid point.
    pub grid_results: Vec<(f64, f64, f64)>,
    /// Per-epoch curve of the final fit.
    pub epochs: Vec<EpochRecord>,
    pub final_train_mse: f64,
    pub final_val_mse: f64,
}

fn mean_loss(model: &SiameseModel, pairs: &[TrainPair], idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return 0.0;
    }
    let sum: f64 = idx
        .iter()
        .map(|&i| {
            let p = &pairs[i];
            let f1 = model.forward(&crate::embedding::DatasetEmbedding {
                source_id: "".into(),
                v: p.a,
            });
            let f2 = model.forward(&crate::embedding::DatasetEmbedding {
                source_id: "".into(),
                v: p.b,
            });
            let d = super::model::l2_distance(&f1, &f2);
            let d_hat = d / (1.0 + d);
            (d_hat - p.target) * (d_hat - p.target)
        })
        .sum();
    sum / idx.len() as f64
}

/// Trains one model on `train_idx`, early-stopping on `val_idx`.
/// Returns the best model (by validation MSE), its val MSE, and the
/// epoch curve. With an empty validation set it runs all epochs and
/// scores on the training set instead.
fn fit(
    pairs: &[TrainPair],
    train_idx: &[usize],
    val_idx: &[usize],
    lr: f64,
    weight_decay: f64,
    cfg: &TrainConfig,
    init_seed: u64,
    shuffle_seed: u64,
) -> Result<(SiameseModel, f64, Vec<EpochRecord>), CoreError> {
    let mut model = SiameseModel::new(init_seed);
    let mut adam = Adam::new(&model, lr, weight_decay);
    let mut rng = ChaCha8Rng::seed_from_u64(shuffle_seed);
    let mut order: Vec<usize> = train_idx.to_vec();

    let mut best = model.clone();
    let mut best_val = f64::INFINITY;
    let mut since_best = 0usize;
    let mut curve = Vec::new();
    let mut batch_counter = 0usize;

    for epoch in 0..cfg.max_epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let mut grads = model.zero_grads();
            let scale = 1.0 / batch.len() as f64;
            let mut batch_loss = 0.0;
            for &i in batch {
                let p = &pairs[i];
                batch_loss += model.accumulate_pair_grads(&p.a, &p.b, p.target, scale, &mut grads);
            }
            if !batch_loss.is_finite() {
                return Err(CoreError::NonFiniteLoss {
                    batch: batch_counter,
                });
            }
            adam.step(&mut model, &grads);
            batch_counter += 1;
        }
        let train_mse = mean_loss(&model, pairs, train_idx);
        let val_mse = if val_idx.is_empty() {
            train_mse
        } else {
            mean_loss(&model, pairs, val_idx)
        };
        curve.push(EpochRecord {
            epoch,
            train_mse,
            val_mse,
        });
        if val_mse < best_val {
            best_val = val_mse;
            best = model.clone();
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                break;
            }
        }
    }
    Ok((best, best_val, curve))
}

/// Grid search over (lr, weight_decay) with k-fold cross-validation,
/// then a final fit on the full corpus with a held-out 10% slice for
/// early stopping.
pub fn train(
    pairs: &[TrainPair],
    cfg: &TrainConfig,
) -> Result<(SiameseModel, TrainReport), CoreError> {
    assert!(pairs.len() >= 2, "need at least 2 training pairs");

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut idx: Vec<usize> = (0..pairs.len()).collect();
    idx.shuffle(&mut rng);

    let folds = cfg.folds.min(pairs.len()).max(2);
    let mut grid_results = Vec::new();
    let mut best_cfg = (cfg.lr_grid[0], cfg.weight_decay_grid[0]);
    let mut best_mean = f64::INFINITY;
    for &lr in &cfg.lr_grid {
        for &wd in &cfg.weight_decay_grid {
            let mut total = 0.0;
            for fold in 0..folds {
                let val_idx: Vec<usize> = idx
                    .iter()
                    .copied()
                    .skip(fold)
                    .step_by(folds)
                    .collect();
                let train_idx: Vec<usize> = idx
                    .iter()
                    .copied()
                    .filter(|i| !val_idx.contains(i))
                    .collect();
                let (_, val_mse, _) = fit(
                    pairs,
                    &train_idx,
                    &val_idx,
                    lr,
                    wd,
                    cfg,
                    cfg.seed.wrapping_add(fold as u64),
                    cfg.seed.wrapping_add(1000 + fold as u64),
                )?;
                total += val_mse;
            }
            let mean = total / folds as f64;
            grid_results.push((lr, wd, mean));
            if mean < best_mean {
                best_mean = mean;
                best_cfg = (lr, wd);
            }
        }
    }

    // final fit: last 10% of a seeded shuffle held out for early stopping
    let val_n = (pairs.len() / 10).max(1).min(pairs.len() - 1);
    let split = pairs.len() - val_n;
    let train_idx = &idx[..split];
    let val_idx = &idx[split..];
    let (model, final_val, curve) = fit(
        pairs,
        train_idx,
        val_idx,
        best_cfg.0,
        best_cfg.1,
        cfg,
        cfg.seed,
        cfg.seed.wrapping_add(7777),
    )?;
    let all: Vec<usize> = (0..pairs.len()).collect();
    let final_train = mean_loss(&model, pairs, &all);
    Ok((
        model,
        TrainReport {
            chosen_lr: best_cfg.0,
            chosen_weight_decay: best_cfg.1,
            grid_results,
            epochs: curve,
            final_train_mse: final_train,
            final_val_mse: final_val,
        },
    ))
}
