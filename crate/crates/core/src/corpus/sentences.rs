//! Rule-based sentence splitting for subtitle text.

/// Chunks that end in a period but do not end a sentence.
const ABBREVIATIONS: &[&str] = &[
    "mr.", "mrs.", "ms.", "dr.", "st.", "jr.", "sr.", "prof.", "vs.", "etc.", "e.g.", "i.e.",
    "mt.", "no.", "lt.", "col.", "gen.", "capt.", "sgt.",
];

const TERMINALS: &[char] = &['.', '!', '?', '\u{2026}'];
const CLOSERS: &[char] = &['"', '\'', '\u{201d}', '\u{2019}', ')', ']', '\u{bb}'];
const DIALOGUE_DASHES: &[&str] = &["-", "\u{2013}", "\u{2014}"];

fn ends_sentence(chunk: &str) -> bool {
    if ABBREVIATIONS.contains(&chunk.to_lowercase().as_str()) {
        return false;
    }
    let stripped = chunk.trim_end_matches(CLOSERS);
    stripped.ends_with(TERMINALS)
}

/// Splits text into sentences.
///
/// A sentence ends after a whitespace chunk whose last character (ignoring
/// closing quotes and brackets) is `.`, `!`, `?` or `…`. A standalone
/// dialogue dash opens a new sentence even without preceding terminal
/// punctuation. Sentences are whitespace-normalized, so joining them with
/// single spaces gives back the normalized input.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut sentences = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for chunk in text.split_whitespace() {
        if DIALOGUE_DASHES.contains(&chunk) && !current.is_empty() {
            sentences.push(current.join(" "));
            current.clear();
        }
        current.push(chunk);
        if ends_sentence(chunk) {
            sentences.push(current.join(" "));
            current.clear();
        }
    }
    if !current.is_empty() {
        sentences.push(current.join(" "));
    }
    sentences
}

/// Joins sentences with single spaces.
pub fn join_sentences<S: AsRef<str>>(sentences: &[S]) -> String {
    sentences
        .iter()
        .map(AsRef::as_ref)
        .collect::<Vec<_>>()
        .join(" ")
}
