//! Parallel subtitle corpora: records, tokenization, sentence splitting,
//! loading and seed filtering.

mod filter;
mod load;
mod sentences;
mod tokenize;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

pub use filter::{seed_filter, FilterDecision, RejectReason, SeedFilterConfig};
pub use load::{load_corpus, load_jsonl, load_srt_pair, parse_srt, CorpusFormat, CorpusReader, SrtCue};
pub use sentences::{join_sentences, split_sentences};
pub use tokenize::{is_word, normalize_whitespace, tokenize, Token, TokenSequence};

/// Source language admitted by the seed filter.
pub const SOURCE_LANG: &str = "en";

/// One aligned source/target subtitle unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubtitlePair {
    pub id: String,
    #[serde(rename = "src")]
    pub source_text: String,
    #[serde(rename = "tgt")]
    pub target_text: String,
    pub src_lang: String,
    pub tgt_lang: String,
    /// Unknown JSONL fields, written back unchanged.
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl SubtitlePair {
    pub fn new(
        id: impl Into<String>,
        source_text: impl Into<String>,
        target_text: impl Into<String>,
        tgt_lang: impl Into<String>,
    ) -> Self {
        SubtitlePair {
            id: id.into(),
            source_text: source_text.into(),
            target_text: target_text.into(),
            src_lang: SOURCE_LANG.to_string(),
            tgt_lang: tgt_lang.into(),
            extra: Map::new(),
        }
    }

    pub fn source_tokens(&self) -> TokenSequence {
        tokenize(&self.source_text, &self.src_lang)
    }

    pub fn target_tokens(&self) -> TokenSequence {
        tokenize(&self.target_text, &self.tgt_lang)
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// A single bad record; readers keep going after yielding one.
    #[error("{path}: {message} at line {line}")]
    Record {
        path: String,
        line: usize,
        message: String,
    },
    #[error("cue count mismatch: {source_path} has {source_count} cues, {target_path} has {target_count}")]
    CueCountMismatch {
        source_path: String,
        source_count: usize,
        target_path: String,
        target_count: usize,
    },
    #[error("invalid seed filter config: {0}")]
    Config(String),
    #[error(transparent)]
    Encoder(#[from] crate::encoders::EncoderError),
}

impl CorpusError {
    /// Record-level errors do not stop a stream; everything else does.
    pub fn is_fatal(&self) -> bool {
        !matches!(self, CorpusError::Record { .. })
    }
}
