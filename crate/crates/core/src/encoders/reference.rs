//! Deterministic, training-free reference backends.
//!
//! Word, sentence and token vectors come from signed feature hashing of
//! character n-grams; the mask filler ranks a corpus vocabulary by unigram
//! frequency. None of them know anything about language, but they share
//! the interfaces of the real models and are bit-reproducible.

use std::collections::HashMap;
use std::path::Path;

use ndarray::Array2;
use serde_json::json;

use super::{
    check_pair_input, ContextualEncoder, EncoderError, Lexicon, MaskFiller, MaskSuggestion, SentenceEncoder,
    Vector, WordVectors,
};
use crate::corpus::{tokenize, TokenSequence};
use crate::hashing::{fnv1a, sha256_hex};

pub const DEFAULT_DIM: usize = 64;

/// Unit vector from signed hashing of the character 3- to 5-grams of
/// `<word>` plus the whole word. Case-insensitive.
pub fn hashed_word_vector(word: &str, dim: usize, seed: u64) -> Vector {
    let lower = word.to_lowercase();
    let bounded: Vec<char> = format!("<{lower}>").chars().collect();
    let mut values = vec![0.0; dim];
    let mut add = |feature: &str| {
        let h = fnv1a(seed, feature.as_bytes());
        let idx = (h % dim as u64) as usize;
        values[idx] += if h >> 63 == 1 { -1.0 } else { 1.0 };
    };
    add(&lower);
    for n in 3..=5 {
        if bounded.len() < n {
            break;
        }
        for w in bounded.windows(n) {
            add(&w.iter().collect::<String>());
        }
    }
    let mut v = Vector::new(values);
    if v.is_zero() {
        // signs cancelled out; fall back to a single hashed coordinate
        let h = fnv1a(seed ^ 0x5bd1_e995, lower.as_bytes());
        let mut values = vec![0.0; dim];
        values[(h % dim as u64) as usize] = 1.0;
        v = Vector::new(values);
    }
    v.normalize();
    v
}

/// Static word vectors: an optional GloVe-format table with hashed n-gram
/// vectors for everything not in it.
#[derive(Debug, Clone)]
pub struct HashedWordVectors {
    dim: usize,
    seed: u64,
    table: HashMap<String, Vector>,
}

impl HashedWordVectors {
    pub fn new(dim: usize, seed: u64) -> Self {
        HashedWordVectors {
            dim,
            seed,
            table: HashMap::new(),
        }
    }

    /// Reads `word v1 v2 ... vd` lines. Every row must have `dim` values;
    /// all-zero rows are dropped so lookups fall back to hashing.
    pub fn with_table(dim: usize, seed: u64, content: &str) -> Result<Self, EncoderError> {
        let mut table = HashMap::new();
        for (i, line) in content.lines().enumerate() {
            let mut parts = line.split_whitespace();
            let Some(word) = parts.next() else { continue };
            let values: Result<Vec<f64>, _> = parts.map(str::parse::<f64>).collect();
            let values = values.map_err(|e| EncoderError::Config(format!("vectors line {}: {e}", i + 1)))?;
            if values.len() != dim {
                return Err(EncoderError::Config(format!(
                    "vectors line {}: {} values, expected {dim}",
                    i + 1,
                    values.len()
                )));
            }
            if values.iter().any(|x| !x.is_finite()) {
                return Err(EncoderError::Config(format!("vectors line {}: non-finite value", i + 1)));
            }
            let v = Vector::new(values);
            if !v.is_zero() {
                table.insert(word.to_string(), v);
            }
        }
        Ok(HashedWordVectors { dim, seed, table })
    }

    pub fn load_table(dim: usize, seed: u64, path: &Path) -> Result<Self, EncoderError> {
        let content = std::fs::read_to_string(path).map_err(|source| EncoderError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::with_table(dim, seed, &content)
    }

    pub fn vocab_size(&self) -> usize {
        self.table.len()
    }
}

impl WordVectors for HashedWordVectors {
    fn dim(&self) -> usize {
        self.dim
    }

    fn word_vector(&self, token: &str) -> Result<Vector, EncoderError> {
        if let Some(v) = self.table.get(token).or_else(|| self.table.get(&token.to_lowercase())) {
            return Ok(v.clone());
        }
        Ok(hashed_word_vector(token, self.dim, self.seed))
    }
}

/// Cross-lingual sentence vectors: mean of hashed vectors of the
/// lexicon-pivoted tokens.
#[derive(Debug, Clone)]
pub struct HashedSentenceEncoder {
    dim: usize,
    seed: u64,
    lexicon: Lexicon,
}

impl HashedSentenceEncoder {
    pub fn new(dim: usize, seed: u64, lexicon: Lexicon) -> Self {
        HashedSentenceEncoder { dim, seed, lexicon }
    }
}

impl SentenceEncoder for HashedSentenceEncoder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn encode(&self, text: &str, lang: &str) -> Result<Vector, EncoderError> {
        let tokens = tokenize(text, lang);
        if tokens.is_empty() {
            return Err(EncoderError::EmptySequence);
        }
        let mut acc = vec![0.0; self.dim];
        for tok in tokens.texts() {
            let v = hashed_word_vector(&self.lexicon.pivot(lang, tok), self.dim, self.seed);
            for (a, b) in acc.iter_mut().zip(v.values()) {
                *a += b;
            }
        }
        let n = tokens.len() as f64;
        Ok(Vector::new(acc.into_iter().map(|x| x / n).collect()))
    }
}

/// Ranks a fixed vocabulary by corpus unigram frequency, ignoring context.
///
/// Scores are relative frequencies; ties are broken alphabetically so the
/// order is total.
#[derive(Debug, Clone)]
pub struct UnigramMaskFiller {
    ranked: Vec<MaskSuggestion>,
}

impl UnigramMaskFiller {
    pub fn from_counts<I, S>(counts: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut merged: HashMap<String, u64> = HashMap::new();
        for (tok, c) in counts {
            *merged.entry(tok.into()).or_default() += c;
        }
        let total: u64 = merged.values().sum();
        let mut ranked: Vec<(String, u64)> = merged.into_iter().filter(|(_, c)| *c > 0).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let ranked = ranked
            .into_iter()
            .map(|(token, c)| MaskSuggestion {
                token,
                score: c as f64 / total.max(1) as f64,
            })
            .collect();
        UnigramMaskFiller { ranked }
    }

    /// Counts lowercased tokens over the given sequences.
    pub fn from_sequences<'a, I>(sequences: I) -> Self
    where
        I: IntoIterator<Item = &'a TokenSequence>,
    {
        let mut counts: HashMap<String, u64> = HashMap::new();
        for seq in sequences {
            for tok in seq.texts() {
                *counts.entry(tok.to_lowercase()).or_default() += 1;
            }
        }
        Self::from_counts(counts)
    }

    /// Reads `token<TAB>count` lines.
    pub fn parse_counts(content: &str) -> Result<Self, EncoderError> {
        let mut counts = Vec::new();
        for (i, line) in content.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (tok, c) = line
                .rsplit_once('\t')
                .ok_or_else(|| EncoderError::Config(format!("vocab line {}: expected token<TAB>count", i + 1)))?;
            let c: u64 = c
                .trim()
                .parse()
                .map_err(|e| EncoderError::Config(format!("vocab line {}: {e}", i + 1)))?;
            counts.push((tok.to_string(), c));
        }
        Ok(Self::from_counts(counts))
    }

    pub fn vocab_size(&self) -> usize {
        self.ranked.len()
    }

    /// `token<TAB>count`-free dump of the ranking, for inspection.
    pub fn ranked(&self) -> &[MaskSuggestion] {
        &self.ranked
    }
}

impl MaskFiller for UnigramMaskFiller {
    fn fill_mask(
        &self,
        tokens: &TokenSequence,
        mask_index: usize,
        top_k: usize,
    ) -> Result<Vec<MaskSuggestion>, EncoderError> {
        if mask_index > tokens.len() {
            return Err(EncoderError::MaskIndex {
                index: mask_index,
                len: tokens.len(),
            });
        }
        Ok(self.ranked.iter().take(top_k).cloned().collect())
    }
}

pub const BEGIN_MARKER: &str = "[CLS]";
pub const SEP_MARKER: &str = "[SEP]";

/// Contextual token encoder without training.
///
/// Each position starts from the hashed vector of its (lexicon-pivoted)
/// token. The row is half that vector and half the mean over a window of
/// `±window` positions, plus a segment vector (source or target side) and a
/// sinusoidal encoding of the position inside its segment.
#[derive(Debug, Clone)]
pub struct HashedContextualEncoder {
    dim: usize,
    seed: u64,
    window: usize,
    capacity: usize,
    lexicon: Lexicon,
}

impl HashedContextualEncoder {
    pub const MARKER_SLOTS: usize = 3;

    pub fn new(dim: usize, seed: u64, window: usize, capacity: usize, lexicon: Lexicon) -> Self {
        HashedContextualEncoder {
            dim,
            seed,
            window,
            capacity,
            lexicon,
        }
    }

    fn positional(&self, pos: usize) -> Vec<f64> {
        let d = self.dim;
        let scale = (2.0 / d as f64).sqrt();
        (0..d)
            .map(|i| {
                let freq = 1.0 / 10000f64.powf((2 * (i / 2)) as f64 / d as f64);
                let angle = pos as f64 * freq;
                scale * if i % 2 == 0 { angle.sin() } else { angle.cos() }
            })
            .collect()
    }
}

impl ContextualEncoder for HashedContextualEncoder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn marker_slots(&self) -> usize {
        Self::MARKER_SLOTS
    }

    fn capacity(&self) -> usize {
        self.capacity
    }

    fn encode_pair(&self, source: &TokenSequence, target: &TokenSequence) -> Result<Array2<f64>, EncoderError> {
        let len = check_pair_input(self, source, target)?;
        // (pivot token, segment, position in segment)
        let mut slots: Vec<(String, usize, usize)> = Vec::with_capacity(len);
        slots.push((BEGIN_MARKER.to_string(), 0, 0));
        for (i, t) in source.texts().enumerate() {
            slots.push((self.lexicon.pivot(&source.lang, t), 0, i + 1));
        }
        slots.push((SEP_MARKER.to_string(), 0, source.len() + 1));
        for (i, t) in target.texts().enumerate() {
            slots.push((self.lexicon.pivot(&target.lang, t), 1, i));
        }
        slots.push((SEP_MARKER.to_string(), 1, target.len()));

        let base: Vec<Vector> = slots
            .iter()
            .map(|(tok, _, _)| hashed_word_vector(tok, self.dim, self.seed))
            .collect();
        let segments = [
            hashed_word_vector("[SEGMENT-A]", self.dim, self.seed),
            hashed_word_vector("[SEGMENT-B]", self.dim, self.seed),
        ];

        let mut out = Array2::zeros((len, self.dim));
        for (i, (_, segment, pos)) in slots.iter().enumerate() {
            let lo = i.saturating_sub(self.window);
            let hi = (i + self.window).min(len - 1);
            let count = (hi - lo + 1) as f64;
            let pe = self.positional(*pos);
            let mut row = out.row_mut(i);
            for k in 0..self.dim {
                let window_mean: f64 = base[lo..=hi].iter().map(|v| v.values()[k]).sum::<f64>() / count;
                row[k] = 0.5 * base[i].values()[k]
                    + 0.5 * window_mean
                    + 0.5 * segments[*segment].values()[k]
                    + pe[k];
            }
        }
        Ok(out)
    }

    fn fingerprint(&self) -> String {
        let desc = json!({
            "kind": "reference-contextual",
            "dim": self.dim,
            "seed": self.seed,
            "window": self.window,
            "capacity": self.capacity,
            "lexicon": self.lexicon.digest(),
        });
        sha256_hex(desc.to_string().as_bytes())
    }
}
