//! Classifier heads over frozen contextual embeddings.

mod checkpoint;
mod head;
mod label;
mod layers;
mod train;

use thiserror::Error;

use crate::encoders::EncoderError;

pub use checkpoint::{Checkpoint, ParamRecord, CHECKPOINT_FORMAT};
pub use head::{argmax, build_head, softmax, Arch, Head, HeadConfig};
pub use label::ClassLabel;
pub use layers::Param;
pub use train::{
    encode_samples, inverse_frequency_weights, predict, predict_encoded, predict_many, train, train_encoded, Encoded,
    EpochStats, Prediction, TrainConfig, TrainHistory,
};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unknown architecture {0:?}; valid: weighted_gru, gru_cnn, cnn, hybrid")]
    UnknownArch(String),
    #[error("invalid model config: {0}")]
    Config(String),
    #[error("{0} is empty")]
    EmptyDataset(&'static str),
    #[error("input width {found} does not match head input_dim {expected}")]
    DimMismatch { expected: usize, found: usize },
    #[error("training diverged at epoch {epoch}, batch {batch}: loss {loss}")]
    Diverged { epoch: usize, batch: usize, loss: f64 },
    #[error("model has not been trained")]
    Untrained,
    #[error("pair {id}: {source}")]
    Sample {
        id: String,
        #[source]
        source: EncoderError,
    },
    #[error(transparent)]
    Encoder(#[from] EncoderError),
    #[error("bad checkpoint: {0}")]
    Checkpoint(String),
    #[error("encoder fingerprint mismatch: checkpoint has {checkpoint}, configured encoder has {encoder}")]
    FingerprintMismatch { checkpoint: String, encoder: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
