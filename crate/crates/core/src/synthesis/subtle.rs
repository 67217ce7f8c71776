use rand::seq::SliceRandom;
use rand::Rng;

use super::{percentile_filter, token_filter_with, EditRecord, Granularity, LabeledSample, SynthesisConfig, SynthesisError};
use crate::corpus::{SubtitlePair, TokenSequence};
use crate::encoders::{cosine, sentence_vector, EncoderBundle, EncoderError, Vector};
use crate::models::ClassLabel;

struct Candidate {
    tokens: TokenSequence,
    edits: Vec<EditRecord>,
}

/// Similarity of a candidate to the original, or `None` when a zero
/// sentence vector leaves it undefined.
fn similarity(orig: &Vector, tokens: &TokenSequence, bundle: &EncoderBundle) -> Result<Option<f64>, SynthesisError> {
    let v = sentence_vector(tokens, bundle.word_vectors.as_ref())?;
    match cosine(orig, &v) {
        Ok(c) => Ok(Some(c)),
        Err(EncoderError::ZeroVector) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Scores candidates, drops the most similar percentile and samples one
/// survivor uniformly.
fn select<R: Rng + ?Sized>(
    pair: &SubtitlePair,
    base: &TokenSequence,
    candidates: Vec<Candidate>,
    label: ClassLabel,
    bundle: &EncoderBundle,
    cfg: &SynthesisConfig,
    rng: &mut R,
) -> Result<Option<LabeledSample>, SynthesisError> {
    let orig = sentence_vector(base, bundle.word_vectors.as_ref())?;
    let mut scored = Vec::with_capacity(candidates.len());
    for c in candidates {
        if let Some(sim) = similarity(&orig, &c.tokens, bundle)? {
            scored.push(((c, sim), sim));
        }
    }
    let survivors = percentile_filter(scored, cfg.percentile_drop_fraction);
    let Some((chosen, sim)) = survivors.into_iter().nth_uniform(rng) else {
        return Ok(None);
    };
    let mut corrupted = pair.clone();
    corrupted.source_text = chosen.tokens.detokenize();
    Ok(Some(LabeledSample {
        pair: corrupted,
        label,
        granularity: Granularity::Subtle,
        edits: chosen.edits,
        original_source: pair.source_text.clone(),
        similarity_to_original: Some(sim),
    }))
}

trait NthUniform: Iterator + Sized {
    fn nth_uniform<R: Rng + ?Sized>(self, rng: &mut R) -> Option<Self::Item> {
        let mut items: Vec<Self::Item> = self.collect();
        if items.is_empty() {
            return None;
        }
        let i = rng.gen_range(0..items.len());
        Some(items.swap_remove(i))
    }
}

impl<I: Iterator> NthUniform for I {}

/// One insertion round: a uniformly drawn slot is probed first, then the
/// remaining slots in random order, until some slot yields a suggestion
/// that passes the token filter. Returns `false` if every slot fails.
fn insert_round<R: Rng + ?Sized>(
    cand: &mut Candidate,
    bundle: &EncoderBundle,
    top_k: usize,
    rng: &mut R,
) -> Result<bool, SynthesisError> {
    let n_slots = cand.tokens.len() + 1;
    let first = rng.gen_range(0..n_slots);
    let mut rest: Vec<usize> = (0..n_slots).filter(|&s| s != first).collect();
    rest.shuffle(rng);
    let filler = bundle.mask_filler.as_ref();
    for slot in std::iter::once(first).chain(rest) {
        let suggestions = filler.fill_mask(&cand.tokens, slot, top_k)?;
        let prev = slot.checked_sub(1).and_then(|i| cand.tokens.get(i));
        let next = cand.tokens.get(slot);
        let pick = suggestions
            .iter()
            .find(|s| token_filter_with(&s.token, prev, next, |t| filler.is_subword(t)).is_keep());
        if let Some(s) = pick {
            let token = s.token.clone();
            cand.tokens.insert_word(slot, &token);
            cand.edits.push(EditRecord::insert_token(slot, &token));
            return Ok(true);
        }
    }
    Ok(false)
}

/// Under-translation by masked-LM insertion into the source.
///
/// Builds `candidates_per_pair` independent candidates. Each draws
/// `k ∈ [1, max_token_edits]` and inserts one token per round, re-probing
/// the updated sentence every round; a candidate whose round finds no
/// acceptable token at any slot is abandoned. Returns `None` when no
/// candidate survives.
pub fn make_ut_subtle<R: Rng + ?Sized>(
    pair: &SubtitlePair,
    bundle: &EncoderBundle,
    cfg: &SynthesisConfig,
    rng: &mut R,
) -> Result<Option<LabeledSample>, SynthesisError> {
    let base = pair.source_tokens();
    if base.is_empty() {
        return Err(SynthesisError::NotApplicable("empty source".into()));
    }
    let mut candidates = Vec::with_capacity(cfg.candidates_per_pair);
    'candidates: for _ in 0..cfg.candidates_per_pair {
        let k = rng.gen_range(1..=cfg.max_token_edits);
        let mut cand = Candidate {
            tokens: base.clone(),
            edits: Vec::with_capacity(k),
        };
        for _ in 0..k {
            if !insert_round(&mut cand, bundle, cfg.mask_top_k, rng)? {
                continue 'candidates;
            }
        }
        candidates.push(cand);
    }
    select(pair, &base, candidates, ClassLabel::Ut, bundle, cfg, rng)
}

/// Over-translation by random omission from the source.
///
/// Same candidate scheme as [`make_ut_subtle`], but each round removes one
/// uniformly chosen word token (punctuation is never omitted). At least one
/// word always remains.
pub fn make_ot_subtle<R: Rng + ?Sized>(
    pair: &SubtitlePair,
    bundle: &EncoderBundle,
    cfg: &SynthesisConfig,
    rng: &mut R,
) -> Result<Option<LabeledSample>, SynthesisError> {
    let base = pair.source_tokens();
    if base.len() <= cfg.max_token_edits {
        return Err(SynthesisError::NotApplicable(format!(
            "source has {} tokens, need more than {}",
            base.len(),
            cfg.max_token_edits
        )));
    }
    let n_words = base.tokens.iter().filter(|t| t.is_word()).count();
    let max_k = cfg.max_token_edits.min(n_words.saturating_sub(1));
    if max_k == 0 {
        return Err(SynthesisError::NotApplicable("source has fewer than two words".into()));
    }
    let mut candidates = Vec::with_capacity(cfg.candidates_per_pair);
    for _ in 0..cfg.candidates_per_pair {
        let k = rng.gen_range(1..=max_k);
        let mut cand = Candidate {
            tokens: base.clone(),
            edits: Vec::with_capacity(k),
        };
        for _ in 0..k {
            let words: Vec<usize> = (0..cand.tokens.len()).filter(|&i| cand.tokens.tokens[i].is_word()).collect();
            let pos = words[rng.gen_range(0..words.len())];
            cand.tokens.remove(pos);
            cand.edits.push(EditRecord::omit_token(pos));
        }
        candidates.push(cand);
    }
    select(pair, &base, candidates, ClassLabel::Ot, bundle, cfg, rng)
}
