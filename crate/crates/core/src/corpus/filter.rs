use std::fmt;

use serde::{Deserialize, Serialize};

use super::{tokenize, CorpusError, SubtitlePair, SOURCE_LANG};
use crate::encoders::{cosine, SentenceEncoder};

/// Length and similarity bounds a pair must meet to seed synthesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeedFilterConfig {
    pub min_tokens: usize,
    pub max_tokens: usize,
    /// Pairs need cosine strictly above this value.
    pub similarity_threshold: f64,
}

impl Default for SeedFilterConfig {
    fn default() -> Self {
        SeedFilterConfig {
            min_tokens: 5,
            max_tokens: 60,
            similarity_threshold: 0.8,
        }
    }
}

impl SeedFilterConfig {
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.min_tokens == 0 || self.min_tokens > self.max_tokens {
            return Err(CorpusError::Config(format!(
                "need 0 < min_tokens <= max_tokens, got {}..{}",
                self.min_tokens, self.max_tokens
            )));
        }
        if !(-1.0..=1.0).contains(&self.similarity_threshold) {
            return Err(CorpusError::Config(format!(
                "similarity_threshold {} outside [-1, 1]",
                self.similarity_threshold
            )));
        }
        Ok(())
    }

    fn length_ok(&self, n: usize) -> bool {
        (self.min_tokens..=self.max_tokens).contains(&n)
    }
}

/// Why a pair was rejected. Checks run in declaration order and the first
/// failure wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    SourceLanguage,
    SourceLength,
    TargetLength,
    Similarity,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectReason::SourceLanguage => "source_language",
            RejectReason::SourceLength => "source_length",
            RejectReason::TargetLength => "target_length",
            RejectReason::Similarity => "similarity",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FilterDecision {
    Accept { similarity: f64 },
    Reject { reason: RejectReason, detail: String },
}

impl FilterDecision {
    pub fn is_accept(&self) -> bool {
        matches!(self, FilterDecision::Accept { .. })
    }

    pub fn reason(&self) -> Option<RejectReason> {
        match self {
            FilterDecision::Accept { .. } => None,
            FilterDecision::Reject { reason, .. } => Some(*reason),
        }
    }
}

/// Applies the seed-quality checks to one pair.
///
/// Both sides are measured with the toolkit tokenizer. Backend failures are
/// returned as `Err`, never as a rejection.
pub fn seed_filter(
    pair: &SubtitlePair,
    cfg: &SeedFilterConfig,
    xsim: &dyn SentenceEncoder,
) -> Result<FilterDecision, CorpusError> {
    let reject = |reason, detail: String| Ok(FilterDecision::Reject { reason, detail });
    if pair.src_lang != SOURCE_LANG {
        return reject(
            RejectReason::SourceLanguage,
            format!("source language {:?} is not {SOURCE_LANG:?}", pair.src_lang),
        );
    }
    let n_src = tokenize(&pair.source_text, &pair.src_lang).len();
    if !cfg.length_ok(n_src) {
        return reject(RejectReason::SourceLength, format!("source has {n_src} tokens"));
    }
    let n_tgt = tokenize(&pair.target_text, &pair.tgt_lang).len();
    if !cfg.length_ok(n_tgt) {
        return reject(RejectReason::TargetLength, format!("target has {n_tgt} tokens"));
    }
    let u = xsim.encode(&pair.source_text, &pair.src_lang)?;
    let v = xsim.encode(&pair.target_text, &pair.tgt_lang)?;
    let similarity = cosine(&u, &v)?;
    if similarity > cfg.similarity_threshold {
        Ok(FilterDecision::Accept { similarity })
    } else {
        reject(
            RejectReason::Similarity,
            format!("cosine {similarity:.4} <= {}", cfg.similarity_threshold),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoders::{EncoderError, Vector};

    /// Returns a fixed vector per language so cosine is under test control.
    struct FixedEncoder {
        src: Vec<f64>,
        tgt: Vec<f64>,
    }

    impl SentenceEncoder for FixedEncoder {
        fn dim(&self) -> usize {
            self.src.len()
        }
        fn encode(&self, _text: &str, lang: &str) -> Result<Vector, EncoderError> {
            Ok(Vector::new(if lang == "en" { self.src.clone() } else { self.tgt.clone() }))
        }
    }

    struct Broken;
    impl SentenceEncoder for Broken {
        fn dim(&self) -> usize {
            2
        }
        fn encode(&self, _: &str, _: &str) -> Result<Vector, EncoderError> {
            Err(EncoderError::Backend("offline".into()))
        }
    }

    fn pair(src: &str, tgt: &str) -> SubtitlePair {
        SubtitlePair::new("p", src, tgt, "fr")
    }

    const FIVE: &str = "one two three four five";

    #[test]
    fn short_source_rejected_for_length() {
        let enc = FixedEncoder { src: vec![1.0, 0.0], tgt: vec![1.0, 0.0] };
        let d = seed_filter(&pair("one two three four", FIVE), &SeedFilterConfig::default(), &enc).unwrap();
        assert_eq!(d.reason(), Some(RejectReason::SourceLength));
        let d = seed_filter(&pair(FIVE, "un deux"), &SeedFilterConfig::default(), &enc).unwrap();
        assert_eq!(d.reason(), Some(RejectReason::TargetLength));
    }

    #[test]
    fn identical_vectors_accept() {
        let enc = FixedEncoder { src: vec![0.3, 0.4], tgt: vec![0.3, 0.4] };
        let d = seed_filter(&pair(FIVE, FIVE), &SeedFilterConfig::default(), &enc).unwrap();
        assert!(d.is_accept());
    }

    #[test]
    fn similarity_threshold_is_strict() {
        // cos = 0.8 exactly for (1, 0) vs (0.8, 0.6)
        let enc = FixedEncoder { src: vec![1.0, 0.0], tgt: vec![0.8, 0.6] };
        let d = seed_filter(&pair(FIVE, FIVE), &SeedFilterConfig::default(), &enc).unwrap();
        assert_eq!(d.reason(), Some(RejectReason::Similarity));
    }

    #[test]
    fn non_english_source_rejected() {
        let enc = FixedEncoder { src: vec![1.0], tgt: vec![1.0] };
        let mut p = pair(FIVE, FIVE);
        p.src_lang = "de".into();
        let d = seed_filter(&p, &SeedFilterConfig::default(), &enc).unwrap();
        assert_eq!(d.reason(), Some(RejectReason::SourceLanguage));
    }

    #[test]
    fn backend_failure_is_an_error() {
        assert!(seed_filter(&pair(FIVE, FIVE), &SeedFilterConfig::default(), &Broken).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SeedFilterConfig::default().validate().is_ok());
        let bad = SeedFilterConfig { min_tokens: 0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SeedFilterConfig { min_tokens: 9, max_tokens: 8, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SeedFilterConfig { similarity_threshold: 1.5, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
