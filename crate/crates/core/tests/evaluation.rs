use otut_core::evaluation::{
    collate_unanimous, per_language_report, AnnotationRecord, Confusion, EvalItem, ExclusionReason,
};
use otut_core::ClassLabel;

// Per-language human-annotated evaluation rows: language, counts
// (NE, OT, UT), accuracy, weighted F1, error recall, and a gold-by-pred
// confusion matrix reproducing those metrics.
type Row = (&'static str, [usize; 3], [f64; 3], [[usize; 3]; 3]);

const TABLE: [Row; 8] = [
    ("es", [4030, 46, 70], [0.8567, 0.8986, 0.3190], [[3518, 0, 512], [46, 0, 0], [33, 3, 34]]),
    ("fr", [4181, 7, 11], [0.8183, 0.8961, 0.3333], [[3430, 0, 751], [7, 0, 0], [5, 0, 6]]),
    ("hi", [3696, 25, 61], [0.9535, 0.9562, 0.1512], [[3604, 71, 21], [25, 0, 0], [48, 11, 2]]),
    ("it", [3430, 62, 89], [0.8802, 0.8998, 0.1921], [[3126, 0, 304], [62, 0, 0], [60, 3, 26]]),
    ("pt", [2811, 34, 145], [0.8793, 0.8920, 0.3575], [[2624, 174, 13], [34, 0, 0], [81, 59, 5]]),
    ("ru", [4104, 35, 121], [0.9087, 0.9213, 0.2051], [[3870, 233, 1], [35, 0, 0], [89, 31, 1]]),
    ("tr", [3573, 73, 93], [0.8791, 0.8969, 0.1627], [[3264, 0, 309], [73, 0, 0], [66, 4, 23]]),
    ("zh-Hant", [4178, 25, 42], [0.8985, 0.9324, 0.3134], [[3795, 0, 383], [25, 0, 0], [21, 2, 19]]),
];

fn items_for(lang: &str, m: &[[usize; 3]; 3]) -> Vec<EvalItem> {
    let mut out = Vec::new();
    for (g, row) in m.iter().enumerate() {
        for (p, &n) in row.iter().enumerate() {
            for _ in 0..n {
                out.push(EvalItem {
                    tgt_lang: lang.to_string(),
                    gold: ClassLabel::from_index(g).unwrap(),
                    pred: ClassLabel::from_index(p).unwrap(),
                });
            }
        }
    }
    out
}

#[test]
fn fixture_matrices_match_their_counts() {
    for (lang, counts, _, m) in TABLE {
        for c in 0..3 {
            assert_eq!(m[c].iter().sum::<usize>(), counts[c], "{lang} class {c}");
        }
    }
}

#[test]
fn hindi_row_reproduces_published_metrics() {
    let (_, _, want, m) = TABLE[2];
    let report = per_language_report(&items_for("hi", &m)).unwrap();
    let row = &report.rows[0];
    assert_eq!((row.ne, row.ut, row.ot), (3696, 61, 25));
    assert!((row.accuracy - want[0]).abs() <= 1e-4, "{}", row.accuracy);
    assert!((row.weighted_f1 - want[1]).abs() <= 1e-4, "{}", row.weighted_f1);
    assert!((row.error_recall.unwrap() - want[2]).abs() <= 1e-4);
}

#[test]
fn full_table_rows_and_pooled_counts() {
    let items: Vec<EvalItem> = TABLE.iter().flat_map(|(l, _, _, m)| items_for(l, m)).collect();
    let report = per_language_report(&items).unwrap();
    assert!(report.warnings.is_empty());
    let langs: Vec<&str> = report.rows.iter().map(|r| r.language.as_str()).collect();
    assert_eq!(langs, ["es", "fr", "hi", "it", "pt", "ru", "tr", "zh-hant"]);
    for ((_, counts, want, _), row) in TABLE.iter().zip(&report.rows) {
        assert_eq!([row.ne, row.ot, row.ut], *counts);
        let got = [row.accuracy, row.weighted_f1, row.error_recall.unwrap()];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= 1e-4, "{}: {got:?} vs {want:?}", row.language);
        }
    }
    let p = &report.pooled;
    assert_eq!((p.ne, p.ot, p.ut, p.total()), (30_003, 307, 632, 30_942));
    let table = report.to_table();
    assert!(table.contains("hi ") && table.contains("(3696, 61, 25)"), "{table}");
}

/// 5,000 pairs per language, three annotators each; unanimous pairs follow
/// the table counts, the remainder split between disagreement and abstention.
fn collation_fixture() -> Vec<AnnotationRecord> {
    use ClassLabel::*;
    let mut recs = Vec::with_capacity(120_000);
    for (lang, counts, _, _) in TABLE {
        let mut marks: Vec<[Option<ClassLabel>; 3]> = Vec::with_capacity(5000);
        for (label, &n) in ClassLabel::ALL.iter().zip(&counts) {
            marks.extend(std::iter::repeat_n([Some(*label); 3], n));
        }
        let mut k = 0;
        while marks.len() < 5000 {
            marks.push(match k % 3 {
                0 => [Some(Ne), None, Some(Ne)],
                1 => [Some(Ne), Some(Ot), Some(Ne)],
                _ => [Some(Ut), Some(Ut), Some(Ot)],
            });
            k += 1;
        }
        for (i, m) in marks.iter().enumerate() {
            for (a, mark) in m.iter().enumerate() {
                recs.push(AnnotationRecord::new(format!("{lang}-{i:04}"), format!("ann{a}"), *mark));
            }
        }
    }
    recs
}

#[test]
fn collation_fixture_reproduces_unanimous_counts() {
    let recs = collation_fixture();
    assert_eq!(recs.len(), 120_000);
    let c = collate_unanimous(&recs, 3).unwrap();
    assert_eq!(c.included.len() + c.excluded.len(), 40_000);
    assert_eq!(c.included.len(), 30_942);
    assert_eq!(
        [c.count(ClassLabel::Ne), c.count(ClassLabel::Ot), c.count(ClassLabel::Ut)],
        [30_003, 307, 632]
    );
    assert_eq!(c.excluded_for(ExclusionReason::Incomplete), 0);
    assert_eq!(
        c.excluded_for(ExclusionReason::Abstention) + c.excluded_for(ExclusionReason::Disagreement),
        9_058
    );
}

#[test]
fn confusion_totals_are_consistent() {
    for (_, counts, _, m) in TABLE {
        let c = Confusion(m);
        assert_eq!(c.total(), counts.iter().sum::<usize>());
    }
}
