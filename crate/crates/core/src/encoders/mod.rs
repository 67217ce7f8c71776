//! Embedding backends behind four interfaces: a masked-LM filler, static
//! word vectors, cross-lingual sentence vectors and a contextual token
//! encoder.
//!
//! Reference implementations in [`reference`] are deterministic and need no
//! model files. [`adapter`] talks to an external process for real
//! pretrained models, and [`config`] builds an [`EncoderBundle`] from the
//! pipeline configuration.

pub mod adapter;
pub mod config;
mod lexicon;
pub mod reference;

use std::sync::Arc;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::TokenSequence;

pub use config::{BackendConfig, BackendKind, EncoderConfig};
pub use lexicon::Lexicon;

#[derive(Debug, Error)]
pub enum EncoderError {
    #[error("mask index {index} out of range for {len} tokens")]
    MaskIndex { index: usize, len: usize },
    #[error("cannot embed an empty token sequence")]
    EmptySequence,
    #[error("cosine is undefined for a zero vector")]
    ZeroVector,
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("sequence of {len} positions exceeds encoder capacity {capacity}")]
    CapacityExceeded { len: usize, capacity: usize },
    #[error("invalid encoder configuration: {0}")]
    Config(String),
    #[error("backend failure: {0}")]
    Backend(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A dense real vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(values: Vec<f64>) -> Self {
        Vector(values)
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }

    pub fn scaled(&self, alpha: f64) -> Vector {
        Vector(self.0.iter().map(|x| x * alpha).collect())
    }

    /// In-place L2 normalization; zero vectors are left untouched.
    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.0.iter_mut().for_each(|x| *x /= n);
        }
    }

    fn add_assign(&mut self, other: &Vector) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }
}

/// Cosine similarity, clamped to [-1, 1].
pub fn cosine(u: &Vector, v: &Vector) -> Result<f64, EncoderError> {
    if u.dim() != v.dim() {
        return Err(EncoderError::DimMismatch(u.dim(), v.dim()));
    }
    let (nu, nv) = (u.norm(), v.norm());
    if nu == 0.0 || nv == 0.0 {
        return Err(EncoderError::ZeroVector);
    }
    let dot: f64 = u.values().iter().zip(v.values()).map(|(a, b)| a * b).sum();
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

/// Arithmetic mean of the backend's per-token vectors.
pub fn sentence_vector(tokens: &TokenSequence, backend: &dyn WordVectors) -> Result<Vector, EncoderError> {
    if tokens.is_empty() {
        return Err(EncoderError::EmptySequence);
    }
    let mut acc = Vector::zeros(backend.dim());
    for tok in tokens.texts() {
        let v = backend.word_vector(tok)?;
        if v.dim() != acc.dim() {
            return Err(EncoderError::DimMismatch(acc.dim(), v.dim()));
        }
        acc.add_assign(&v);
    }
    Ok(acc.scaled(1.0 / tokens.len() as f64))
}

/// A candidate for a masked slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskSuggestion {
    pub token: String,
    /// Higher is more probable.
    pub score: f64,
}

/// Masked-LM probing. The mask occupies a new slot inserted before
/// `tokens[mask_index]`; `mask_index == tokens.len()` appends it.
pub trait MaskFiller: Send + Sync {
    /// At most `top_k` suggestions in non-increasing score order.
    fn fill_mask(
        &self,
        tokens: &TokenSequence,
        mask_index: usize,
        top_k: usize,
    ) -> Result<Vec<MaskSuggestion>, EncoderError>;

    /// Whether `token` continues a previous word piece in this backend's
    /// vocabulary (WordPiece `##` marking by default).
    fn is_subword(&self, token: &str) -> bool {
        token.starts_with("##")
    }
}

/// Static word embeddings (GloVe-style).
pub trait WordVectors: Send + Sync {
    fn dim(&self) -> usize;
    /// Never returns a zero vector: unknown words get a deterministic
    /// fallback.
    fn word_vector(&self, token: &str) -> Result<Vector, EncoderError>;
}

/// Cross-lingual sentence embeddings (LASER-style).
pub trait SentenceEncoder: Send + Sync {
    fn dim(&self) -> usize;
    fn encode(&self, text: &str, lang: &str) -> Result<Vector, EncoderError>;
}

/// Contextual token embeddings for a (source, target) pair encoded jointly
/// as `[begin] source [sep] target [end]`.
pub trait ContextualEncoder: Send + Sync {
    fn dim(&self) -> usize;
    /// Number of marker positions added around the two sequences.
    fn marker_slots(&self) -> usize;
    /// Maximum number of positions (markers included).
    fn capacity(&self) -> usize;
    /// Matrix of shape `(|source| + |target| + marker_slots, dim)`.
    fn encode_pair(&self, source: &TokenSequence, target: &TokenSequence) -> Result<Array2<f64>, EncoderError>;
    /// Identifies the embedding space; checkpoints are bound to it.
    fn fingerprint(&self) -> String;
}

/// Checks the shared preconditions of [`ContextualEncoder::encode_pair`].
pub fn check_pair_input(
    encoder: &dyn ContextualEncoder,
    source: &TokenSequence,
    target: &TokenSequence,
) -> Result<usize, EncoderError> {
    if source.is_empty() || target.is_empty() {
        return Err(EncoderError::EmptySequence);
    }
    let len = source.len() + target.len() + encoder.marker_slots();
    if len > encoder.capacity() {
        return Err(EncoderError::CapacityExceeded {
            len,
            capacity: encoder.capacity(),
        });
    }
    Ok(len)
}

/// The four backends the pipeline needs.
#[derive(Clone)]
pub struct EncoderBundle {
    pub mask_filler: Arc<dyn MaskFiller>,
    pub word_vectors: Arc<dyn WordVectors>,
    pub xsim: Arc<dyn SentenceEncoder>,
    pub contextual: Arc<dyn ContextualEncoder>,
}

impl EncoderBundle {
    pub fn new(
        mask_filler: Arc<dyn MaskFiller>,
        word_vectors: Arc<dyn WordVectors>,
        xsim: Arc<dyn SentenceEncoder>,
        contextual: Arc<dyn ContextualEncoder>,
    ) -> Result<Self, EncoderError> {
        if contextual.dim() == 0 {
            return Err(EncoderError::Config("contextual encoder dimension must be positive".into()));
        }
        Ok(EncoderBundle {
            mask_filler,
            word_vectors,
            xsim,
            contextual,
        })
    }

    pub fn fingerprint(&self) -> String {
        self.contextual.fingerprint()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cosine_basics() {
        let u = Vector::new(vec![1.0, 2.0, 3.0]);
        assert!((cosine(&u, &u).unwrap() - 1.0).abs() < 1e-12);
        let e1 = Vector::new(vec![1.0, 0.0]);
        let e2 = Vector::new(vec![0.0, 1.0]);
        assert_eq!(cosine(&e1, &e2).unwrap(), 0.0);
        assert!((cosine(&u, &u.scaled(-1.0)).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_errors() {
        let z = Vector::zeros(2);
        let e1 = Vector::new(vec![1.0, 0.0]);
        assert!(matches!(cosine(&z, &e1), Err(EncoderError::ZeroVector)));
        assert!(matches!(
            cosine(&e1, &Vector::new(vec![1.0])),
            Err(EncoderError::DimMismatch(2, 1))
        ));
    }

    fn arb_vec() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..16).prop_flat_map(|d| {
            (
                prop::collection::vec(-10.0f64..10.0, d),
                prop::collection::vec(-10.0f64..10.0, d),
            )
        })
    }

    proptest! {
        #[test]
        fn cosine_symmetric_and_scale_invariant((a, b) in arb_vec(), alpha in 0.01f64..100.0) {
            let u = Vector::new(a);
            let v = Vector::new(b);
            prop_assume!(u.norm() > 1e-6 && v.norm() > 1e-6);
            let c = cosine(&u, &v).unwrap();
            prop_assert!((-1.0..=1.0).contains(&c));
            prop_assert!((c - cosine(&v, &u).unwrap()).abs() < 1e-12);
            prop_assert!((c - cosine(&u.scaled(alpha), &v).unwrap()).abs() < 1e-9);
        }
    }
}
