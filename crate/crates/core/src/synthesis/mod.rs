//! Synthetic OT/UT negatives.
//!
//! Only the English source side is ever edited. Inserting content into the
//! source makes the (unchanged) target an under-translation; removing
//! content makes it an over-translation.
//!
//! * Subtle negatives change 1 to `max_token_edits` tokens, one round at a
//!   time, and keep only candidates outside the most-similar percentile.
//! * Gross negatives add or remove one whole sentence.

mod dataset;
mod gross;
mod percentile;
mod stopwords;
mod subtle;
mod token_filter;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{join_sentences, split_sentences, tokenize, SubtitlePair, SOURCE_LANG};
use crate::encoders::EncoderError;
use crate::models::ClassLabel;

pub use dataset::{assemble_dataset, class_targets, BucketTargets, CountRow, Dataset, DatasetManifest};
pub use gross::{make_gross, GrossDirection};
pub use percentile::percentile_filter;
pub use stopwords::{is_stopword, STOPWORDS};
pub use subtle::{make_ot_subtle, make_ut_subtle};
pub use token_filter::{token_filter, token_filter_with, TokenDecision, TokenRejection};

#[derive(Debug, Error)]
pub enum SynthesisError {
    #[error(transparent)]
    Encoder(#[from] EncoderError),
    /// The pair does not meet the operation's precondition.
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("invalid synthesis config: {0}")]
    Config(String),
    #[error("corpus too small: requested {requested} samples, at most {achievable} can be assembled")]
    CorpusTooSmall { requested: usize, achievable: usize },
    #[error("duplicate pair id {0:?}")]
    DuplicateId(String),
    #[error("edit replay failed: {0}")]
    Replay(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    None,
    Subtle,
    Gross,
}

impl Granularity {
    pub fn as_str(self) -> &'static str {
        match self {
            Granularity::None => "none",
            Granularity::Subtle => "subtle",
            Granularity::Gross => "gross",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditKind {
    InsertToken,
    OmitToken,
    AddSentence,
    RemoveSentence,
}

/// One applied corruption. `position` is a token index for token edits and
/// a sentence index for sentence edits, both taken at application time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditRecord {
    pub kind: EditKind,
    pub position: usize,
    /// Inserted token or added sentence; empty for omissions and removals.
    pub payload: String,
}

impl EditRecord {
    pub fn insert_token(position: usize, token: &str) -> Self {
        EditRecord {
            kind: EditKind::InsertToken,
            position,
            payload: token.to_string(),
        }
    }

    pub fn omit_token(position: usize) -> Self {
        EditRecord {
            kind: EditKind::OmitToken,
            position,
            payload: String::new(),
        }
    }

    pub fn add_sentence(position: usize, sentence: &str) -> Self {
        EditRecord {
            kind: EditKind::AddSentence,
            position,
            payload: sentence.to_string(),
        }
    }

    pub fn remove_sentence(position: usize) -> Self {
        EditRecord {
            kind: EditKind::RemoveSentence,
            position,
            payload: String::new(),
        }
    }
}

/// Re-applies `edits` to `original`, producing the corrupted source.
///
/// Token edits work on the toolkit tokenization and sentence edits on the
/// sentence split; the text is rebuilt after each edit.
pub fn replay_edits(original: &str, edits: &[EditRecord]) -> Result<String, SynthesisError> {
    let mut text = original.to_string();
    for (i, edit) in edits.iter().enumerate() {
        let bad = |msg: &str| SynthesisError::Replay(format!("edit {i}: {msg}"));
        match edit.kind {
            EditKind::InsertToken | EditKind::OmitToken => {
                let mut tokens = tokenize(&text, SOURCE_LANG);
                if edit.kind == EditKind::InsertToken {
                    if edit.position > tokens.len() || edit.payload.is_empty() {
                        return Err(bad("insert position out of range or empty token"));
                    }
                    tokens.insert_word(edit.position, &edit.payload);
                } else {
                    if edit.position >= tokens.len() {
                        return Err(bad("omit position out of range"));
                    }
                    tokens.remove(edit.position);
                }
                text = tokens.detokenize();
            }
            EditKind::AddSentence | EditKind::RemoveSentence => {
                let mut sentences = split_sentences(&text);
                if edit.kind == EditKind::AddSentence {
                    if edit.position > sentences.len() || edit.payload.trim().is_empty() {
                        return Err(bad("add position out of range or empty sentence"));
                    }
                    sentences.insert(edit.position, edit.payload.clone());
                } else {
                    if edit.position >= sentences.len() {
                        return Err(bad("remove position out of range"));
                    }
                    sentences.remove(edit.position);
                }
                text = join_sentences(&sentences);
            }
        }
    }
    Ok(text)
}

/// Mix of the three classes; must sum to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassMix {
    pub ot: f64,
    pub ut: f64,
    pub ne: f64,
}

impl Default for ClassMix {
    fn default() -> Self {
        ClassMix {
            ot: 0.30,
            ut: 0.30,
            ne: 0.40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisConfig {
    pub max_token_edits: usize,
    pub candidates_per_pair: usize,
    pub percentile_drop_fraction: f64,
    pub mask_top_k: usize,
    pub class_mix: ClassMix,
    pub subtle_fraction_of_errors: f64,
    pub train_fraction: f64,
    pub seed: u64,
    /// Total samples to assemble.
    pub num_samples: usize,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            max_token_edits: 5,
            candidates_per_pair: 20,
            percentile_drop_fraction: 0.4,
            mask_top_k: 50,
            class_mix: ClassMix::default(),
            subtle_fraction_of_errors: 0.83,
            train_fraction: 0.80,
            seed: 0,
            num_samples: 1000,
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<(), SynthesisError> {
        let bad = |m: String| Err(SynthesisError::Config(m));
        let m = &self.class_mix;
        if [m.ot, m.ut, m.ne].iter().any(|x| !(0.0..=1.0).contains(x)) || ((m.ot + m.ut + m.ne) - 1.0).abs() > 1e-9 {
            return bad(format!("class_mix must be fractions summing to 1, got {m:?}"));
        }
        for (name, v) in [
            ("subtle_fraction_of_errors", self.subtle_fraction_of_errors),
            ("train_fraction", self.train_fraction),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return bad(format!("{name} must be in (0, 1), got {v}"));
            }
        }
        if !(0.0..1.0).contains(&self.percentile_drop_fraction) {
            return bad(format!(
                "percentile_drop_fraction must be in [0, 1), got {}",
                self.percentile_drop_fraction
            ));
        }
        if self.max_token_edits == 0 {
            return bad("max_token_edits must be at least 1".into());
        }
        if self.candidates_per_pair == 0 || self.mask_top_k == 0 {
            return bad("candidates_per_pair and mask_top_k must be positive".into());
        }
        Ok(())
    }
}

/// A (possibly corrupted) pair with its label and edit provenance.
///
/// `pair.source_text` is the corrupted source; the target is never edited.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub pair: SubtitlePair,
    pub label: ClassLabel,
    pub granularity: Granularity,
    pub edits: Vec<EditRecord>,
    pub original_source: String,
    /// Similarity of corrupted to original source; `None` for NE samples.
    pub similarity_to_original: Option<f64>,
}

impl LabeledSample {
    /// The untouched pair as a no-error sample.
    pub fn no_error(pair: SubtitlePair) -> Self {
        LabeledSample {
            original_source: pair.source_text.clone(),
            pair,
            label: ClassLabel::Ne,
            granularity: Granularity::None,
            edits: Vec::new(),
            similarity_to_original: None,
        }
    }

    pub fn to_record(&self) -> SampleRecord {
        SampleRecord {
            id: self.pair.id.clone(),
            src: self.pair.source_text.clone(),
            tgt: self.pair.target_text.clone(),
            tgt_lang: self.pair.tgt_lang.clone(),
            label: self.label,
            granularity: self.granularity,
            edits: self.edits.clone(),
            orig_src: self.original_source.clone(),
            sim: self.similarity_to_original,
        }
    }
}

/// Wire form of a sample, one JSON object per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: String,
    pub src: String,
    pub tgt: String,
    pub tgt_lang: String,
    pub label: ClassLabel,
    pub granularity: Granularity,
    pub edits: Vec<EditRecord>,
    pub orig_src: String,
    pub sim: Option<f64>,
}

impl From<SampleRecord> for LabeledSample {
    fn from(r: SampleRecord) -> Self {
        LabeledSample {
            pair: SubtitlePair::new(r.id, r.src, r.tgt, r.tgt_lang),
            label: r.label,
            granularity: r.granularity,
            edits: r.edits,
            original_source: r.orig_src,
            similarity_to_original: r.sim,
        }
    }
}

/// Checks the structural invariants of a sample: label, granularity and
/// edits agree; replay reproduces the source; token or sentence deltas fit
/// the granularity.
pub fn check_sample(sample: &LabeledSample, max_token_edits: usize) -> Result<(), String> {
    let s = sample;
    let is_ne = s.label == ClassLabel::Ne;
    let unchanged = s.pair.source_text == s.original_source;
    if is_ne != (s.granularity == Granularity::None) || is_ne != s.edits.is_empty() || is_ne != unchanged {
        return Err(format!("{}: label/granularity/edits disagree", s.pair.id));
    }
    let replayed = replay_edits(&s.original_source, &s.edits).map_err(|e| e.to_string())?;
    if !is_ne && replayed != s.pair.source_text {
        return Err(format!("{}: replay gives {replayed:?}", s.pair.id));
    }
    for e in &s.edits {
        let needs_payload = matches!(e.kind, EditKind::InsertToken | EditKind::AddSentence);
        if needs_payload == e.payload.is_empty() {
            return Err(format!("{}: payload presence wrong for {:?}", s.pair.id, e.kind));
        }
    }
    let n_tok = |t: &str| tokenize(t, SOURCE_LANG).len() as i64;
    let n_sent = |t: &str| split_sentences(t).len() as i64;
    let max = max_token_edits as i64;
    match (s.label, s.granularity) {
        (ClassLabel::Ut, Granularity::Subtle) => {
            let d = n_tok(&s.pair.source_text) - n_tok(&s.original_source);
            if !(1..=max).contains(&d) {
                return Err(format!("{}: UT token delta {d}", s.pair.id));
            }
        }
        (ClassLabel::Ot, Granularity::Subtle) => {
            let d = n_tok(&s.original_source) - n_tok(&s.pair.source_text);
            if !(1..=max).contains(&d) {
                return Err(format!("{}: OT token delta {d}", s.pair.id));
            }
        }
        (ClassLabel::Ut, Granularity::Gross) | (ClassLabel::Ot, Granularity::Gross) => {
            let want = if s.label == ClassLabel::Ut { 1 } else { -1 };
            let d = n_sent(&s.pair.source_text) - n_sent(&s.original_source);
            if d != want {
                return Err(format!("{}: sentence delta {d}", s.pair.id));
            }
        }
        _ => {}
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replay_ut_subtle_example() {
        // it [still] is my duty to remind you [fully] of what you've
        // [already] got [done] there [recently].
        let orig = "it is my duty to remind you of what you've got there.";
        let edits = vec![
            EditRecord::insert_token(1, "still"),
            EditRecord::insert_token(8, "fully"),
            EditRecord::insert_token(12, "already"),
            EditRecord::insert_token(14, "done"),
            EditRecord::insert_token(16, "recently"),
        ];
        let out = replay_edits(orig, &edits).unwrap();
        assert_eq!(
            out,
            "it still is my duty to remind you fully of what you've already got done there recently."
        );
        for e in &edits {
            assert!(token_filter(&e.payload, None, None).is_keep(), "{}", e.payload);
        }
    }

    #[test]
    fn replay_ot_subtle_examples() {
        let orig = "Please take care of Espada until this war is over.";
        let edits = vec![EditRecord::omit_token(1), EditRecord::omit_token(3)];
        assert_eq!(replay_edits(orig, &edits).unwrap(), "Please care of until this war is over.");

        let orig = "We were gonna stop at the Elephant Cafe.";
        let edits = vec![
            EditRecord::omit_token(2),
            EditRecord::omit_token(2),
            EditRecord::omit_token(5),
        ];
        assert_eq!(replay_edits(orig, &edits).unwrap(), "We were at the Elephant.");
    }

    #[test]
    fn replay_gross_examples() {
        let orig = "Ivan is set to pull out of this place in a week. We're moving to Antigua.";
        let out = replay_edits(orig, &[EditRecord::remove_sentence(1)]).unwrap();
        assert_eq!(out, "Ivan is set to pull out of this place in a week.");

        let out = replay_edits(
            "- Fair enough. - So?",
            &[EditRecord::add_sentence(0, "People had envisioned a monster.")],
        )
        .unwrap();
        assert_eq!(out, "People had envisioned a monster. - Fair enough. - So?");
    }

    #[test]
    fn replay_rejects_bad_positions() {
        assert!(replay_edits("a b", &[EditRecord::omit_token(2)]).is_err());
        assert!(replay_edits("a b", &[EditRecord::insert_token(3, "x")]).is_err());
        assert!(replay_edits("A. B.", &[EditRecord::remove_sentence(2)]).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SynthesisConfig::default().validate().is_ok());
        let mut c = SynthesisConfig::default();
        c.class_mix.ne = 0.5;
        assert!(c.validate().is_err());
        let c = SynthesisConfig { max_token_edits: 0, ..Default::default() };
        assert!(c.validate().is_err());
        let c = SynthesisConfig { train_fraction: 1.0, ..Default::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn sample_record_round_trip() {
        let pair = SubtitlePair::new("x1", "I have no luggage.", "Je n'ai pas de bagage.", "fr");
        let s = LabeledSample::no_error(pair);
        let json = serde_json::to_string(&s.to_record()).unwrap();
        assert!(json.contains("\"label\":\"NE\""));
        assert!(json.contains("\"granularity\":\"none\""));
        let back: LabeledSample = serde_json::from_str::<SampleRecord>(&json).unwrap().into();
        assert_eq!(back, s);
        assert!(check_sample(&s, 5).is_ok());
    }
}
