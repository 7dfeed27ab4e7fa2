//! Variational autoencoder over one-hot level grids.
//!
//! Encoder: `(Dense → BatchNorm → ReLU)` per hidden width, then a dense head
//! emitting `mu ‖ log_var`. Decoder mirrors the hidden widths and ends in a
//! dense head with a softmax over each tile's seven channels.

mod config;
mod container;
mod model;
mod train;

pub use config::{LrDecay, VaeConfig};
pub use container::{load_model, model_file_name, save_model, ContainerError, MAGIC};
pub use model::{reparameterize, LatentDistribution, LatentVector, LossParts, LossProbe, TrainingMeta, Vae};
pub use train::{train, train_with, EpochStats, TrainError};

/// Single-precision model used for training output, persistence and serving.
pub type VaeModel = Vae<f32>;

use crate::level::LevelError;
use crate::nn::NnError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VaeError {
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Level(#[from] LevelError),
    #[error("{what}: expected width {expected}, got {actual}")]
    Width {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("invalid config: {0}")]
    Config(String),
}
