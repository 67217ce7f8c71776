use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::head::{build_head, Head, HeadConfig};
use super::{ClassLabel, ModelError};
use crate::TOOL_VERSION;

pub const CHECKPOINT_FORMAT: &str = "otut-checkpoint/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRecord {
    pub name: String,
    pub shape: [usize; 2],
    pub values: Vec<f64>,
}

/// Self-describing trained head, bound to one embedding space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub tool_version: String,
    pub head: HeadConfig,
    pub input_dim: usize,
    pub classes: Vec<ClassLabel>,
    pub encoder_fingerprint: String,
    pub seed: u64,
    pub loss_weights: [f64; 3],
    pub params: Vec<ParamRecord>,
}

impl Checkpoint {
    pub fn from_head(head: &Head, encoder_fingerprint: &str) -> Result<Self, ModelError> {
        if !head.is_trained() {
            return Err(ModelError::Untrained);
        }
        Ok(Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            head: head.config().clone(),
            input_dim: head.input_dim(),
            classes: ClassLabel::ALL.to_vec(),
            encoder_fingerprint: encoder_fingerprint.to_string(),
            seed: head.seed(),
            loss_weights: head.loss_weights(),
            params: head
                .params()
                .iter()
                .map(|p| ParamRecord {
                    name: p.name.clone(),
                    shape: [p.value.nrows(), p.value.ncols()],
                    values: p.value.iter().copied().collect(),
                })
                .collect(),
        })
    }

    /// Rebuilds the head, refusing a different embedding space.
    pub fn into_head(self, encoder_fingerprint: &str) -> Result<Head, ModelError> {
        let bad = |m: String| Err(ModelError::Checkpoint(m));
        if self.format != CHECKPOINT_FORMAT {
            return bad(format!("unsupported format {:?}", self.format));
        }
        if self.encoder_fingerprint != encoder_fingerprint {
            return Err(ModelError::FingerprintMismatch {
                checkpoint: self.encoder_fingerprint,
                encoder: encoder_fingerprint.to_string(),
            });
        }
        if self.classes != ClassLabel::ALL {
            return bad(format!("class mapping {:?} differs from NE, OT, UT", self.classes));
        }
        let mut head = build_head(&self.head, self.input_dim, self.seed)?;
        let slots = head.params_mut();
        if slots.len() != self.params.len() {
            return bad(format!("expected {} parameter arrays, found {}", slots.len(), self.params.len()));
        }
        for (slot, rec) in slots.into_iter().zip(self.params) {
            if slot.name != rec.name || slot.value.dim() != (rec.shape[0], rec.shape[1]) {
                return bad(format!(
                    "parameter {} {:?} does not match {} {:?}",
                    rec.name,
                    rec.shape,
                    slot.name,
                    slot.value.dim()
                ));
            }
            slot.value = Array2::from_shape_vec((rec.shape[0], rec.shape[1]), rec.values)
                .map_err(|e| ModelError::Checkpoint(format!("parameter {}: {e}", rec.name)))?;
        }
        head.loss_weights = self.loss_weights;
        head.trained = true;
        Ok(head)
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        let json = serde_json::to_vec(self).map_err(|e| ModelError::Checkpoint(e.to_string()))?;
        std::fs::write(path, json).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let bytes = std::fs::read(path).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_slice(&bytes).map_err(|e| ModelError::Checkpoint(format!("{}: {e}", path.display())))
    }
}
