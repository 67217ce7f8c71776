use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::adapter::ProcessAdapter;
use super::reference::{
    HashedContextualEncoder, HashedSentenceEncoder, HashedWordVectors, UnigramMaskFiller, DEFAULT_DIM,
};
use super::{EncoderBundle, EncoderError, Lexicon};
use crate::corpus::TokenSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    #[default]
    Reference,
    Adapter,
}

/// One backend block: `{kind, dim, seed, ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendKind,
    /// Falls back to the bundle-level `dim`.
    pub dim: Option<usize>,
    /// Falls back to the bundle-level `seed`.
    pub seed: Option<u64>,
    /// Reference mask filler: `token<TAB>count` vocabulary. Reference word
    /// vectors: GloVe-format text table.
    pub path: Option<PathBuf>,
    /// Adapter: program and arguments.
    pub command: Vec<String>,
    /// Reference contextual encoder: half-width of the mixing window.
    pub window: usize,
    /// Reference contextual encoder: maximum positions, markers included.
    pub capacity: usize,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            kind: BackendKind::Reference,
            dim: None,
            seed: None,
            path: None,
            command: Vec::new(),
            window: 2,
            capacity: 512,
        }
    }
}

/// Encoder block of the pipeline configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncoderConfig {
    pub dim: usize,
    pub seed: u64,
    /// Bilingual pivot list used by the reference cross-lingual and
    /// contextual backends.
    pub lexicon: Option<PathBuf>,
    pub mask_filler: BackendConfig,
    pub word_vectors: BackendConfig,
    pub xsim: BackendConfig,
    pub contextual: BackendConfig,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            dim: DEFAULT_DIM,
            seed: 0,
            lexicon: None,
            mask_filler: BackendConfig::default(),
            word_vectors: BackendConfig::default(),
            xsim: BackendConfig::default(),
            contextual: BackendConfig::default(),
        }
    }
}

impl EncoderConfig {
    fn dim_of(&self, b: &BackendConfig) -> Result<usize, EncoderError> {
        let d = b.dim.unwrap_or(self.dim);
        if d == 0 {
            return Err(EncoderError::Config("dim must be positive".into()));
        }
        Ok(d)
    }

    fn seed_of(&self, b: &BackendConfig) -> u64 {
        b.seed.unwrap_or(self.seed)
    }

    /// Builds the four backends. Adapters are started and probed here.
    ///
    /// `mask_corpus` provides unigram counts for a reference mask filler
    /// that has no vocabulary file; it may be `None` when the filler is not
    /// going to be used (training, evaluation).
    pub fn build(&self, mask_corpus: Option<&[TokenSequence]>) -> Result<EncoderBundle, EncoderError> {
        let lexicon = match &self.lexicon {
            Some(p) => Lexicon::load(p)?,
            None => Lexicon::default(),
        };

        let mask_filler: Arc<dyn super::MaskFiller> = match self.mask_filler.kind {
            BackendKind::Adapter => Arc::new(self.spawn(&self.mask_filler)?),
            BackendKind::Reference => match (&self.mask_filler.path, mask_corpus) {
                (Some(p), _) => {
                    let content = std::fs::read_to_string(p).map_err(|source| EncoderError::Io {
                        path: p.display().to_string(),
                        source,
                    })?;
                    Arc::new(UnigramMaskFiller::parse_counts(&content)?)
                }
                (None, Some(seqs)) => Arc::new(UnigramMaskFiller::from_sequences(seqs)),
                (None, None) => Arc::new(UnigramMaskFiller::from_counts(Vec::<(String, u64)>::new())),
            },
        };

        let word_vectors: Arc<dyn super::WordVectors> = match self.word_vectors.kind {
            BackendKind::Adapter => Arc::new(self.spawn(&self.word_vectors)?),
            BackendKind::Reference => {
                let (d, s) = (self.dim_of(&self.word_vectors)?, self.seed_of(&self.word_vectors));
                match &self.word_vectors.path {
                    Some(p) => Arc::new(HashedWordVectors::load_table(d, s, p)?),
                    None => Arc::new(HashedWordVectors::new(d, s)),
                }
            }
        };

        let xsim: Arc<dyn super::SentenceEncoder> = match self.xsim.kind {
            BackendKind::Adapter => Arc::new(self.spawn(&self.xsim)?),
            BackendKind::Reference => Arc::new(HashedSentenceEncoder::new(
                self.dim_of(&self.xsim)?,
                self.seed_of(&self.xsim),
                lexicon.clone(),
            )),
        };

        let contextual: Arc<dyn super::ContextualEncoder> = match self.contextual.kind {
            BackendKind::Adapter => Arc::new(self.spawn(&self.contextual)?),
            BackendKind::Reference => {
                let c = &self.contextual;
                if c.capacity <= HashedContextualEncoder::MARKER_SLOTS {
                    return Err(EncoderError::Config("contextual capacity too small".into()));
                }
                Arc::new(HashedContextualEncoder::new(
                    self.dim_of(c)?,
                    self.seed_of(c),
                    c.window,
                    c.capacity,
                    lexicon,
                ))
            }
        };

        EncoderBundle::new(mask_filler, word_vectors, xsim, contextual)
    }

    fn spawn(&self, b: &BackendConfig) -> Result<ProcessAdapter, EncoderError> {
        ProcessAdapter::spawn(&b.command, b.dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_builds_reference_bundle() {
        let bundle = EncoderConfig::default().build(None).unwrap();
        assert_eq!(bundle.contextual.dim(), DEFAULT_DIM);
        assert_eq!(bundle.word_vectors.dim(), DEFAULT_DIM);
        assert_eq!(bundle.contextual.marker_slots(), 3);
        let again = EncoderConfig::default().build(None).unwrap();
        assert_eq!(bundle.fingerprint(), again.fingerprint());
    }

    #[test]
    fn zero_dim_is_rejected() {
        let cfg = EncoderConfig { dim: 0, ..Default::default() };
        assert!(cfg.build(None).is_err());
    }

    #[test]
    fn empty_adapter_command_is_a_config_error() {
        let cfg = EncoderConfig {
            xsim: BackendConfig { kind: BackendKind::Adapter, ..Default::default() },
            ..Default::default()
        };
        assert!(matches!(cfg.build(None), Err(EncoderError::Config(_))));
    }

    #[test]
    fn missing_adapter_program_fails_at_startup() {
        let cfg = EncoderConfig {
            contextual: BackendConfig {
                kind: BackendKind::Adapter,
                command: vec!["/nonexistent/model-server".into()],
                ..Default::default()
            },
            ..Default::default()
        };
        assert!(matches!(cfg.build(None), Err(EncoderError::Backend(_))));
    }
}
