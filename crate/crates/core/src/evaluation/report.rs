use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Confusion, EvalError};
use crate::models::ClassLabel;

/// Group name for tags whose primary subtag is not an ISO 639-1 code.
pub const OTHER_LANGUAGE: &str = "other";
pub const POOLED_ROW: &str = "all";

const ISO_639_1: &[&str] = &[
    "aa", "ab", "ae", "af", "ak", "am", "an", "ar", "as", "av", "ay", "az", "ba", "be", "bg", "bh", "bi", "bm", "bn", "bo",
    "br", "bs", "ca", "ce", "ch", "co", "cr", "cs", "cu", "cv", "cy", "da", "de", "dv", "dz", "ee", "el", "en", "eo", "es",
    "et", "eu", "fa", "ff", "fi", "fj", "fo", "fr", "fy", "ga", "gd", "gl", "gn", "gu", "gv", "ha", "he", "hi", "ho", "hr",
    "ht", "hu", "hy", "hz", "ia", "id", "ie", "ig", "ii", "ik", "io", "is", "it", "iu", "ja", "jv", "ka", "kg", "ki", "kj",
    "kk", "kl", "km", "kn", "ko", "kr", "ks", "ku", "kv", "kw", "ky", "la", "lb", "lg", "li", "ln", "lo", "lt", "lu", "lv",
    "mg", "mh", "mi", "mk", "ml", "mn", "mr", "ms", "mt", "my", "na", "nb", "nd", "ne", "ng", "nl", "nn", "no", "nr", "nv",
    "ny", "oc", "oj", "om", "or", "os", "pa", "pi", "pl", "ps", "pt", "qu", "rm", "rn", "ro", "ru", "rw", "sa", "sc", "sd",
    "se", "sg", "si", "sk", "sl", "sm", "sn", "so", "sq", "sr", "ss", "st", "su", "sv", "sw", "ta", "te", "tg", "th", "ti",
    "tk", "tl", "tn", "to", "tr", "ts", "tt", "tw", "ty", "ug", "uk", "ur", "uz", "ve", "vi", "vo", "wa", "wo", "xh", "yi",
    "yo", "za", "zh", "zu",
];

/// Lowercased tag if its primary subtag is a known two-letter code
/// (`zh-Hant` → `zh-hant`), else `None`.
pub fn normalize_language(tag: &str) -> Option<String> {
    let lower = tag.trim().to_lowercase().replace('_', "-");
    let primary = lower.split('-').next().unwrap_or("");
    ISO_639_1.binary_search(&primary).is_ok().then_some(lower)
}

/// One evaluated pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalItem {
    pub tgt_lang: String,
    pub gold: ClassLabel,
    pub pred: ClassLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageRow {
    pub language: String,
    pub ne: usize,
    pub ut: usize,
    pub ot: usize,
    pub accuracy: f64,
    pub weighted_f1: f64,
    /// `None` when the group has no gold errors.
    pub error_recall: Option<f64>,
    pub confusion: Confusion,
}

impl LanguageRow {
    fn from_confusion(language: String, c: Confusion) -> Self {
        LanguageRow {
            language,
            ne: c.gold_support(ClassLabel::Ne),
            ut: c.gold_support(ClassLabel::Ut),
            ot: c.gold_support(ClassLabel::Ot),
            accuracy: c.accuracy(),
            weighted_f1: c.weighted_f1(),
            error_recall: c.error_recall(),
            confusion: c,
        }
    }

    pub fn total(&self) -> usize {
        self.ne + self.ut + self.ot
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Sorted by language code, with `other` last.
    pub rows: Vec<LanguageRow>,
    pub pooled: LanguageRow,
    pub warnings: Vec<String>,
}

/// Groups items by target language and computes counts and metrics per
/// group and pooled.
pub fn per_language_report(items: &[EvalItem]) -> Result<EvalReport, EvalError> {
    if items.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut groups: BTreeMap<String, Confusion> = BTreeMap::new();
    let mut other = Confusion::default();
    let mut unknown: BTreeMap<String, usize> = BTreeMap::new();
    let mut pooled = Confusion::default();
    for it in items {
        let (g, p) = (it.gold.index(), it.pred.index());
        pooled.0[g][p] += 1;
        match normalize_language(&it.tgt_lang) {
            Some(lang) => groups.entry(lang).or_default().0[g][p] += 1,
            None => {
                other.0[g][p] += 1;
                *unknown.entry(it.tgt_lang.clone()).or_default() += 1;
            }
        }
    }
    let mut warnings = Vec::new();
    for (tag, n) in &unknown {
        let w = format!("unknown language tag {tag:?} on {n} pair(s), grouped under {OTHER_LANGUAGE:?}");
        log::warn!("{w}");
        warnings.push(w);
    }
    let mut rows: Vec<LanguageRow> = groups
        .into_iter()
        .map(|(lang, c)| LanguageRow::from_confusion(lang, c))
        .collect();
    if other.total() > 0 {
        rows.push(LanguageRow::from_confusion(OTHER_LANGUAGE.to_string(), other));
    }
    Ok(EvalReport {
        rows,
        pooled: LanguageRow::from_confusion(POOLED_ROW.to_string(), pooled),
        warnings,
    })
}

impl EvalReport {
    /// Aligned text table: language, (#NE, #UT, #OT), accuracy, F1, error
    /// recall, then the pooled row.
    pub fn to_table(&self) -> String {
        let header = ["Target language", "(#NE, #UT, #OT)", "Accuracy", "F1", "Error recall"];
        let fmt_row = |r: &LanguageRow| {
            [
                r.language.clone(),
                format!("({}, {}, {})", r.ne, r.ut, r.ot),
                format!("{:.4}", r.accuracy),
                format!("{:.4}", r.weighted_f1),
                r.error_recall.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}")),
            ]
        };
        let mut body: Vec<[String; 5]> = self.rows.iter().map(fmt_row).collect();
        body.push(fmt_row(&self.pooled));
        let mut widths = header.map(str::len);
        for row in &body {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, cells: &[&str]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            let _ = writeln!(out, "{}", padded.join("  ").trim_end());
        };
        line(&mut out, &header);
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        line(&mut out, &rule.iter().map(String::as_str).collect::<Vec<_>>());
        for (i, row) in body.iter().enumerate() {
            if i + 1 == body.len() {
                line(&mut out, &rule.iter().map(String::as_str).collect::<Vec<_>>());
            }
            line(&mut out, &row.iter().map(String::as_str).collect::<Vec<_>>());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ClassLabel::*;

    fn items(lang: &str, cells: &[(ClassLabel, ClassLabel, usize)]) -> Vec<EvalItem> {
        cells
            .iter()
            .flat_map(|&(gold, pred, n)| {
                std::iter::repeat_with(move || EvalItem {
                    tgt_lang: lang.to_string(),
                    gold,
                    pred,
                })
                .take(n)
            })
            .collect()
    }

    #[test]
    fn language_codes() {
        assert!(ISO_639_1.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(normalize_language("zh-Hant").as_deref(), Some("zh-hant"));
        assert_eq!(normalize_language("HI").as_deref(), Some("hi"));
        assert_eq!(normalize_language("klingon"), None);
        assert_eq!(normalize_language("xx"), None);
    }

    #[test]
    fn single_language_row_equals_pooled() {
        let its = items("fr", &[(Ne, Ne, 5), (Ot, Ne, 1), (Ut, Ut, 2)]);
        let r = per_language_report(&its).unwrap();
        assert_eq!(r.rows.len(), 1);
        let mut row = r.rows[0].clone();
        row.language = POOLED_ROW.to_string();
        assert_eq!(row, r.pooled);
    }

    #[test]
    fn unknown_tags_go_to_other_with_a_warning() {
        let mut its = items("de", &[(Ne, Ne, 2)]);
        its.extend(items("elvish", &[(Ot, Ot, 1)]));
        let r = per_language_report(&its).unwrap();
        assert_eq!(r.rows.last().unwrap().language, OTHER_LANGUAGE);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn no_gold_errors_prints_na() {
        let its = items("it", &[(Ne, Ne, 3), (Ne, Ot, 1)]);
        let r = per_language_report(&its).unwrap();
        assert_eq!(r.rows[0].error_recall, None);
        let table = r.to_table();
        assert!(table.lines().nth(2).unwrap().ends_with("n/a"), "{table}");
        assert!(table.starts_with("Target language"));
    }
}
