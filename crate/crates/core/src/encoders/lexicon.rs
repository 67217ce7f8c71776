use std::collections::HashMap;
use std::path::Path;

use super::EncoderError;
use crate::hashing::sha256_hex;

/// Bilingual word list mapping target-language words onto English pivots.
///
/// The reference cross-lingual and contextual backends look words up here
/// before hashing, which gives translations of the same word the same
/// vector. File format: one `lang<TAB>word<TAB>english` entry per line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    entries: HashMap<(String, String), String>,
    digest: String,
}

impl Lexicon {
    pub fn from_entries<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, S, S)>,
        S: Into<String>,
    {
        let mut lines = Vec::new();
        let mut map = HashMap::new();
        for (lang, word, pivot) in entries {
            let (lang, word, pivot) = (lang.into(), word.into().to_lowercase(), pivot.into().to_lowercase());
            lines.push(format!("{lang}\t{word}\t{pivot}"));
            map.insert((lang, word), pivot);
        }
        lines.sort();
        Lexicon {
            entries: map,
            digest: sha256_hex(lines.join("\n").as_bytes()),
        }
    }

    pub fn parse(content: &str) -> Result<Self, EncoderError> {
        let mut entries = Vec::new();
        for (i, line) in content.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            match (parts.next(), parts.next(), parts.next(), parts.next()) {
                (Some(l), Some(w), Some(p), None) if !l.is_empty() && !w.is_empty() && !p.is_empty() => {
                    entries.push((l.to_string(), w.to_string(), p.to_string()));
                }
                _ => {
                    return Err(EncoderError::Config(format!(
                        "lexicon line {}: expected lang<TAB>word<TAB>pivot",
                        i + 1
                    )))
                }
            }
        }
        Ok(Lexicon::from_entries(entries))
    }

    pub fn load(path: &Path) -> Result<Self, EncoderError> {
        let content = std::fs::read_to_string(path).map_err(|source| EncoderError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Lexicon::parse(&content)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Lowercased pivot form of `word` in language `lang`.
    pub fn pivot(&self, lang: &str, word: &str) -> String {
        let lower = word.to_lowercase();
        self.entries
            .get(&(lang.to_string(), lower.clone()))
            .cloned()
            .unwrap_or(lower)
    }

    /// Content digest, stable under entry order.
    pub fn digest(&self) -> &str {
        &self.digest
    }

    /// Serializes in the file format, sorted.
    pub fn to_tsv(&self) -> String {
        let mut lines: Vec<String> = self
            .entries
            .iter()
            .map(|((l, w), p)| format!("{l}\t{w}\t{p}"))
            .collect();
        lines.sort();
        let mut out = lines.join("\n");
        out.push('\n');
        out
    }
}
