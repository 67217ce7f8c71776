use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{EditRecord, Granularity, LabeledSample, SynthesisError};
use crate::corpus::{join_sentences, normalize_whitespace, split_sentences, SubtitlePair};
use crate::models::ClassLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrossDirection {
    Ot,
    Ut,
}

/// Whole-sentence corruption of the source.
///
/// `Ot` removes one uniformly chosen sentence and needs at least two.
/// `Ut` inserts `donor` at a uniformly chosen sentence boundary. Either way
/// the result must re-split into exactly the edited sentence list, so a
/// donor that would merge with a neighbour is refused as not applicable.
/// `similarity_to_original` is left unset; see
/// [`assemble_dataset`](super::assemble_dataset) for scoring.
pub fn make_gross<R: Rng + ?Sized>(
    pair: &SubtitlePair,
    direction: GrossDirection,
    donor: Option<&str>,
    rng: &mut R,
) -> Result<LabeledSample, SynthesisError> {
    let mut sentences = split_sentences(&pair.source_text);
    let (label, edit) = match direction {
        GrossDirection::Ot => {
            if sentences.len() < 2 {
                return Err(SynthesisError::NotApplicable(format!(
                    "source has {} sentence(s), need at least 2",
                    sentences.len()
                )));
            }
            let pos = rng.gen_range(0..sentences.len());
            sentences.remove(pos);
            (ClassLabel::Ot, EditRecord::remove_sentence(pos))
        }
        GrossDirection::Ut => {
            let donor = donor.ok_or_else(|| SynthesisError::Config("UT gross edit needs a donor sentence".into()))?;
            let donor = normalize_whitespace(donor);
            if split_sentences(&donor).len() != 1 {
                return Err(SynthesisError::NotApplicable(format!("donor {donor:?} is not a single sentence")));
            }
            let pos = rng.gen_range(0..=sentences.len());
            sentences.insert(pos, donor.clone());
            (ClassLabel::Ut, EditRecord::add_sentence(pos, &donor))
        }
    };
    let text = join_sentences(&sentences);
    if split_sentences(&text) != sentences {
        return Err(SynthesisError::NotApplicable("edited source does not re-split cleanly".into()));
    }
    let mut corrupted = pair.clone();
    corrupted.source_text = text;
    Ok(LabeledSample {
        pair: corrupted,
        label,
        granularity: Granularity::Gross,
        edits: vec![edit],
        original_source: pair.source_text.clone(),
        similarity_to_original: None,
    })
}
