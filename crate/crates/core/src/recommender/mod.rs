//! The full tag recommender: chained content encoder, user-vector fusion,
//! dense + sigmoid head, training loop and checkpoints.

mod checkpoint;
mod diagnostics;
mod model;
mod train;
mod users;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, TrainingMeta, CHECKPOINT_VERSION, MAGIC};
pub use diagnostics::{random_grad_check, GradCheckSetup};
pub use model::{aggregate, rank_tags, AggregationMode, ForwardCache, ModelConfig, ModelParams};
pub use train::{train, train_with_validation, validation_loss, TrainConfig, TrainReport};
pub use users::UserEmbeddings;

use thiserror::Error;

use crate::neural::NeuralError;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error("token id {id} has no embedding row (table has {rows})")]
    Token { id: usize, rows: usize },
    #[error("embedding dimension {found} does not match model input dimension {expected}")]
    EmbeddingDim { expected: usize, found: usize },
    #[error("user vector has length {found}, model expects {expected}")]
    UserDim { expected: usize, found: usize },
    #[error("k = {k} is outside 1..={len}")]
    K { k: usize, len: usize },
    #[error("cannot train on an empty dataset")]
    EmptyDataset,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("addition mode needs a projection matrix and concatenation mode must not have one")]
    ModeMismatch,
    #[error("target has length {found}, model predicts {expected} tags")]
    TargetLen { expected: usize, found: usize },
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("not a checkpoint: bad magic bytes")]
    Magic,
    #[error("unsupported checkpoint version {0}")]
    UnsupportedVersion(u32),
    #[error("checkpoint truncated while reading {0}")]
    Truncated(String),
    #[error("checksum mismatch: stored {stored:016x}, computed {computed:016x}")]
    Checksum { stored: u64, computed: u64 },
    #[error("missing section {0}")]
    MissingSection(String),
    #[error("malformed section {section}: {message}")]
    Section { section: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
