//! Whitespace and punctuation tokenizer.
//!
//! Text is split on Unicode whitespace; inside each chunk every leading and
//! trailing non-alphanumeric character becomes its own token, and the
//! alphanumeric core (which may contain inner apostrophes, hyphens, dots)
//! stays whole. Each token remembers whether whitespace preceded it so the
//! sequence can be turned back into text.

use serde::{Deserialize, Serialize};

/// One surface token.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    /// Whether the token was preceded by whitespace in the original text.
    pub space_before: bool,
}

impl Token {
    pub fn word(text: impl Into<String>) -> Self {
        Token {
            text: text.into(),
            space_before: true,
        }
    }

    /// True when the token has at least one alphanumeric character.
    pub fn is_word(&self) -> bool {
        is_word(&self.text)
    }
}

pub fn is_word(token: &str) -> bool {
    token.chars().any(char::is_alphanumeric)
}

/// An ordered token list tagged with its language.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence {
    pub tokens: Vec<Token>,
    pub lang: String,
}

impl TokenSequence {
    pub fn new(tokens: Vec<Token>, lang: impl Into<String>) -> Self {
        TokenSequence {
            tokens,
            lang: lang.into(),
        }
    }

    /// Builds a sequence from bare strings, all separated by spaces.
    pub fn from_words<S: AsRef<str>>(words: &[S], lang: &str) -> Self {
        let tokens = words
            .iter()
            .enumerate()
            .map(|(i, w)| Token {
                text: w.as_ref().to_string(),
                space_before: i > 0,
            })
            .collect();
        TokenSequence::new(tokens, lang)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.text.as_str())
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.texts().map(str::to_string).collect()
    }

    pub fn get(&self, index: usize) -> Option<&str> {
        self.tokens.get(index).map(|t| t.text.as_str())
    }

    /// Inserts a word before position `index` (`index == len` appends).
    ///
    /// The inserted word is space-separated from both neighbours unless the
    /// right neighbour is punctuation that was attached to its left side.
    pub fn insert_word(&mut self, index: usize, word: &str) {
        assert!(index <= self.tokens.len(), "insert index out of range");
        if index == 0 || self.opens_word(index) {
            if let Some(next) = self.tokens.get_mut(index) {
                next.space_before = true;
            }
        }
        self.tokens.insert(
            index,
            Token {
                text: word.to_string(),
                space_before: index > 0,
            },
        );
    }

    /// True if `tokens[index]` is a word or leading punctuation glued to
    /// the word that follows it.
    fn opens_word(&self, index: usize) -> bool {
        let mut rest = self.tokens[index..].iter();
        match rest.next() {
            None => false,
            Some(first) if first.is_word() => true,
            Some(_) => {
                for tok in rest {
                    if tok.space_before {
                        return false;
                    }
                    if tok.is_word() {
                        return true;
                    }
                }
                false
            }
        }
    }

    /// Removes and returns the token at `index`.
    ///
    /// A following word (or punctuation glued to one) inherits the removed
    /// token's leading whitespace so that two words never fuse.
    pub fn remove(&mut self, index: usize) -> Token {
        let removed = self.tokens.remove(index);
        if removed.space_before && self.opens_word(index) {
            self.tokens[index].space_before = true;
        }
        removed
    }

    /// Joins tokens back into text, one space wherever whitespace was.
    pub fn detokenize(&self) -> String {
        let mut out = String::new();
        for (i, tok) in self.tokens.iter().enumerate() {
            if i > 0 && tok.space_before {
                out.push(' ');
            }
            out.push_str(&tok.text);
        }
        out
    }
}

/// Tokenizes `text`. Whitespace-only input gives an empty sequence.
pub fn tokenize(text: &str, lang: &str) -> TokenSequence {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        let pieces = split_chunk(chunk);
        for (i, piece) in pieces.into_iter().enumerate() {
            tokens.push(Token {
                text: piece.to_string(),
                space_before: i == 0,
            });
        }
    }
    if let Some(first) = tokens.first_mut() {
        first.space_before = false;
    }
    TokenSequence::new(tokens, lang)
}

/// Splits one whitespace-free chunk into punctuation and core pieces.
fn split_chunk(chunk: &str) -> Vec<&str> {
    let chars: Vec<(usize, char)> = chunk.char_indices().collect();
    let single = |&(i, c): &(usize, char)| &chunk[i..i + c.len_utf8()];
    let Some(start) = chars.iter().position(|(_, c)| c.is_alphanumeric()) else {
        return chars.iter().map(single).collect();
    };
    let end = chars
        .iter()
        .rposition(|(_, c)| c.is_alphanumeric())
        .unwrap_or(start);
    let mut pieces: Vec<&str> = chars[..start].iter().map(single).collect();
    let (core_end, last) = chars[end];
    pieces.push(&chunk[chars[start].0..core_end + last.len_utf8()]);
    pieces.extend(chars[end + 1..].iter().map(single));
    pieces
}

/// Collapses whitespace runs to single spaces and trims the ends.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}
