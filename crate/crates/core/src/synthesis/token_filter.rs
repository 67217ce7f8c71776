use std::fmt;

use serde::{Deserialize, Serialize};

use super::stopwords::is_stopword;

/// Which insertion-candidate rule fired, in evaluation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenRejection {
    Subword,
    Punctuation,
    Stopword,
    SpecialSymbol,
    Repetition,
    Numeral,
}

impl fmt::Display for TokenRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenRejection::Subword => "subword",
            TokenRejection::Punctuation => "punctuation",
            TokenRejection::Stopword => "stopword",
            TokenRejection::SpecialSymbol => "special_symbol",
            TokenRejection::Repetition => "repetition",
            TokenRejection::Numeral => "numeral",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenDecision {
    Keep,
    Reject(TokenRejection),
}

impl TokenDecision {
    pub fn is_keep(self) -> bool {
        self == TokenDecision::Keep
    }
}

fn is_joiner(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '-')
}

/// Screens a masked-LM suggestion before it is inserted between `prev`
/// and `next`, using the WordPiece `##` continuation convention.
pub fn token_filter(token: &str, prev: Option<&str>, next: Option<&str>) -> TokenDecision {
    token_filter_with(token, prev, next, |t| t.starts_with("##"))
}

/// [`token_filter`] with a backend-specific subword test.
///
/// A token is rejected, first match wins, if it is a subword continuation,
/// pure punctuation, an English stopword, contains a character other than
/// letters, digits, apostrophes and hyphens (or starts/ends with an
/// apostrophe or hyphen), repeats a neighbour case-insensitively, or
/// contains a digit.
pub fn token_filter_with(
    token: &str,
    prev: Option<&str>,
    next: Option<&str>,
    is_subword: impl Fn(&str) -> bool,
) -> TokenDecision {
    use TokenRejection::*;
    let reject = TokenDecision::Reject;
    if token.is_empty() || is_subword(token) {
        return reject(Subword);
    }
    if !token.chars().any(char::is_alphanumeric) {
        return reject(Punctuation);
    }
    if is_stopword(token) {
        return reject(Stopword);
    }
    let odd_char = token.chars().any(|c| !(c.is_alphanumeric() || is_joiner(c)));
    let loose_edge = token.starts_with(is_joiner) || token.ends_with(is_joiner);
    if odd_char || loose_edge {
        return reject(SpecialSymbol);
    }
    let lower = token.to_lowercase();
    if [prev, next].into_iter().flatten().any(|n| n.to_lowercase() == lower) {
        return reject(Repetition);
    }
    if token.chars().any(|c| c.is_numeric()) {
        return reject(Numeral);
    }
    TokenDecision::Keep
}
