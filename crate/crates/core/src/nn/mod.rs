//! Twin-branch distance network: five per-feature-group MLP branches, a
//! fusion MLP, a clamped Euclidean distance head, and seeded Adam
//! training with grid-search cross-validation.

mod adam;
mod model;
mod train;

pub use adam::Adam;
pub use model::{Affine, LayerGrads, SiameseModel, ARCH, N_LAYERS};
pub use train::{train, EpochRecord, TrainConfig, TrainPair, TrainReport};
