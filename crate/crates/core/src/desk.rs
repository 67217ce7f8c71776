//! Synthetic subtitle corpus for tests and demos.
//!
//! English lines come from small templates. Each target is a word-for-word
//! pseudo-language rendering, and the returned [`Lexicon`] maps every
//! pseudo-word back to its English original, which is what the reference
//! cross-lingual and contextual backends need to treat a pair as aligned.
//! A share of the pairs is deliberately broken (mismatched or too short) so
//! the seed filter has something to reject.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, SubtitlePair, Token, TokenSequence, SOURCE_LANG};
use crate::encoders::Lexicon;
use crate::hashing::{child_rng, fnv1a};

const NAMES: &[&str] = &[
    "Ivan", "Maria", "Espada", "Tom", "Anna", "Mr. Carter", "Lucy", "Doctor Bell", "Sam", "Nora", "Victor", "Grace",
];
const SUBJECTS: &[&str] = &["I", "We", "They", "You", "He", "She"];
const VERBS: &[&str] = &[
    "found", "lost", "painted", "moved", "carried", "opened", "closed", "sold", "bought", "fixed", "watched", "cleaned",
    "hid", "borrowed", "packed", "dropped",
];
const VERBS_BASE: &[&str] = &[
    "find", "take", "open", "close", "sell", "buy", "fix", "watch", "clean", "hide", "borrow", "pack", "bring", "check",
];
const ADJECTIVES: &[&str] = &[
    "old", "green", "heavy", "small", "broken", "strange", "quiet", "expensive", "wooden", "empty", "bright", "dusty",
];
const NOUNS: &[&str] = &[
    "book", "car", "door", "letter", "suitcase", "camera", "window", "boat", "piano", "lamp", "ticket", "map", "bottle",
    "jacket", "radio", "tree", "garden", "key",
];
const PLACES: &[&str] = &[
    "in the kitchen", "near the station", "at the hotel", "behind the church", "on the bridge", "in the office",
    "by the river", "at the market", "under the stairs",
];
const TIMES: &[&str] = &[
    "yesterday", "last night", "this morning", "in a week", "after dinner", "before the storm", "every Sunday",
];
const REPLIES: &[&str] = &["Fair enough", "So", "Really", "Of course", "Not again", "Wait", "Listen", "Fine"];
const SHORT_LINES: &[&str] = &["Yes.", "No way.", "Okay, go.", "Thanks.", "Hmm?", "Run!"];

const SYLLABLES: &[&str] = &[
    "ka", "lo", "mi", "ren", "ta", "su", "vo", "ne", "zi", "pa", "dor", "bel", "ki", "mu", "sa", "fen", "ri", "go", "li",
    "um", "te", "ve", "nor", "ish", "al", "ro", "ce", "du",
];

/// Desk corpus parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeskConfig {
    pub pairs: usize,
    pub languages: Vec<String>,
    /// Share of lines made of two sentences.
    pub two_sentence_fraction: f64,
    /// Share of pairs that should fail the seed filter.
    pub noisy_fraction: f64,
    pub seed: u64,
}

impl Default for DeskConfig {
    fn default() -> Self {
        DeskConfig {
            pairs: 1000,
            languages: ["de", "fr", "hi", "es"].map(String::from).to_vec(),
            two_sentence_fraction: 0.3,
            noisy_fraction: 0.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeskCorpus {
    pub pairs: Vec<SubtitlePair>,
    /// Ids of the pairs that were generated broken.
    pub noisy_ids: Vec<String>,
    pub lexicon: Lexicon,
}

impl DeskCorpus {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for p in &self.pairs {
            out.push_str(&serde_json::to_string(p).expect("pair serializes"));
            out.push('\n');
        }
        out
    }
}

struct Cipher {
    words: BTreeMap<(String, String), String>,
    taken: HashSet<(String, String)>,
}

impl Cipher {
    fn new() -> Self {
        Cipher {
            words: BTreeMap::new(),
            taken: HashSet::new(),
        }
    }

    fn word(&mut self, lang: &str, english: &str) -> String {
        let key = (lang.to_string(), english.to_lowercase());
        if let Some(w) = self.words.get(&key) {
            return w.clone();
        }
        let mut h = fnv1a(0x5eed, format!("{lang}\u{0}{}", key.1).as_bytes());
        let mut w = String::new();
        let n_syl = 2 + (h % 2) as usize;
        loop {
            for _ in 0..n_syl {
                w.push_str(SYLLABLES[(h % SYLLABLES.len() as u64) as usize]);
                h /= SYLLABLES.len() as u64;
                if h == 0 {
                    h = fnv1a(h, w.as_bytes());
                }
            }
            if self.taken.insert((lang.to_string(), w.clone())) {
                break;
            }
            h = fnv1a(h ^ 1, w.as_bytes());
        }
        self.words.insert(key, w.clone());
        w
    }

    fn render(&mut self, source: &TokenSequence, lang: &str) -> String {
        let mut tokens: Vec<Token> = Vec::with_capacity(source.len());
        for t in &source.tokens {
            let text = if t.is_word() {
                let w = self.word(lang, &t.text);
                if t.text.chars().next().is_some_and(char::is_uppercase) {
                    capitalize(&w)
                } else {
                    w
                }
            } else {
                t.text.clone()
            };
            tokens.push(Token {
                text,
                space_before: t.space_before,
            });
        }
        TokenSequence::new(tokens, lang).detokenize()
    }

    fn lexicon(&self) -> Lexicon {
        Lexicon::from_entries(self.words.iter().map(|((lang, en), w)| (lang.clone(), w.clone(), en.clone())))
    }
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn pick<'a, R: Rng + ?Sized>(rng: &mut R, xs: &[&'a str]) -> &'a str {
    xs.choose(rng).expect("non-empty list")
}

fn sentence<R: Rng + ?Sized>(rng: &mut R) -> String {
    match rng.gen_range(0..6) {
        0 => format!(
            "{} {} the {} {} {}.",
            pick(rng, SUBJECTS),
            pick(rng, VERBS),
            pick(rng, ADJECTIVES),
            pick(rng, NOUNS),
            pick(rng, PLACES)
        ),
        1 => format!(
            "{} {} a {} {} {}.",
            pick(rng, NAMES),
            pick(rng, VERBS),
            pick(rng, NOUNS),
            pick(rng, PLACES),
            pick(rng, TIMES)
        ),
        2 => format!(
            "Did you {} the {} {}?",
            pick(rng, VERBS_BASE),
            pick(rng, ADJECTIVES),
            pick(rng, NOUNS)
        ),
        3 => format!(
            "{}, please {} my {} {}.",
            pick(rng, NAMES),
            pick(rng, VERBS_BASE),
            pick(rng, NOUNS),
            pick(rng, TIMES)
        ),
        4 => format!(
            "- {}. - {} {} the {} {}!",
            pick(rng, REPLIES),
            pick(rng, SUBJECTS),
            pick(rng, VERBS),
            pick(rng, NOUNS),
            pick(rng, TIMES)
        ),
        _ => format!(
            "{} is going to {} the {} {} {}.",
            pick(rng, NAMES),
            pick(rng, VERBS_BASE),
            pick(rng, ADJECTIVES),
            pick(rng, NOUNS),
            pick(rng, PLACES)
        ),
    }
}

/// Generates a deterministic desk corpus.
///
/// Clean pairs have 5 to 60 tokens on both sides.
pub fn generate(cfg: &DeskConfig) -> DeskCorpus {
    assert!(!cfg.languages.is_empty(), "at least one target language");
    let mut rng = child_rng(cfg.seed, &["desk"]);
    let mut cipher = Cipher::new();
    let mut pairs = Vec::with_capacity(cfg.pairs);
    let mut noisy_ids = Vec::new();
    let mut lang_counts: HashMap<String, usize> = HashMap::new();
    for i in 0..cfg.pairs {
        let lang = cfg.languages[i % cfg.languages.len()].clone();
        *lang_counts.entry(lang.clone()).or_default() += 1;
        let id = format!("desk-{i:06}");
        let noisy = rng.gen_bool(cfg.noisy_fraction);
        let source = if noisy && rng.gen_bool(0.5) {
            pick(&mut rng, SHORT_LINES).to_string()
        } else if rng.gen_bool(cfg.two_sentence_fraction) {
            format!("{} {}", sentence(&mut rng), sentence(&mut rng))
        } else {
            sentence(&mut rng)
        };
        let rendered_from = if noisy && source.len() > 12 {
            // translation of an unrelated line
            let mut other = sentence(&mut rng);
            while other == source {
                other = sentence(&mut rng);
            }
            other
        } else {
            source.clone()
        };
        let target = cipher.render(&tokenize(&rendered_from, SOURCE_LANG), &lang);
        if noisy {
            noisy_ids.push(id.clone());
        }
        pairs.push(SubtitlePair::new(id, source, target, lang));
    }
    DeskCorpus {
        pairs,
        noisy_ids,
        lexicon: cipher.lexicon(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{seed_filter, split_sentences, FilterDecision, SeedFilterConfig};
    use crate::encoders::reference::HashedSentenceEncoder;

    #[test]
    fn generation_is_deterministic() {
        let cfg = DeskConfig {
            pairs: 50,
            noisy_fraction: 0.2,
            ..DeskConfig::default()
        };
        assert_eq!(generate(&cfg), generate(&cfg));
    }

    #[test]
    fn clean_pairs_pass_and_noisy_pairs_fail_the_seed_filter() {
        let cfg = DeskConfig {
            pairs: 400,
            noisy_fraction: 0.2,
            ..DeskConfig::default()
        };
        let desk = generate(&cfg);
        assert!(!desk.noisy_ids.is_empty());
        let xsim = HashedSentenceEncoder::new(64, 0, desk.lexicon.clone());
        let noisy: HashSet<&str> = desk.noisy_ids.iter().map(String::as_str).collect();
        let filter = SeedFilterConfig::default();
        for p in &desk.pairs {
            let accepted = matches!(seed_filter(p, &filter, &xsim).unwrap(), FilterDecision::Accept { .. });
            assert_eq!(accepted, !noisy.contains(p.id.as_str()), "{} {:?} / {:?}", p.id, p.source_text, p.target_text);
        }
    }

    #[test]
    fn two_sentence_share_is_roughly_as_configured() {
        let desk = generate(&DeskConfig {
            pairs: 2000,
            ..DeskConfig::default()
        });
        // the dialogue template already splits in two
        let multi = desk.pairs.iter().filter(|p| split_sentences(&p.source_text).len() >= 2).count();
        assert!(multi > 600 && multi < 1200, "{multi}");
    }

    #[test]
    fn lexicon_pivots_targets_back_to_english() {
        let desk = generate(&DeskConfig {
            pairs: 20,
            languages: vec!["fr".into()],
            ..DeskConfig::default()
        });
        for p in &desk.pairs {
            let src: Vec<String> = p.source_tokens().texts().map(str::to_lowercase).collect();
            let back: Vec<String> = p.target_tokens().texts().map(|t| desk.lexicon.pivot("fr", t)).collect();
            assert_eq!(src, back);
        }
    }
}
