use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::models::ClassLabel;

/// One annotator's judgment of one pair; `mark == None` is an abstention.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub pair_id: String,
    pub annotator_id: String,
    pub mark: Option<ClassLabel>,
}

impl AnnotationRecord {
    pub fn new(pair_id: impl Into<String>, annotator_id: impl Into<String>, mark: Option<ClassLabel>) -> Self {
        AnnotationRecord {
            pair_id: pair_id.into(),
            annotator_id: annotator_id.into(),
            mark,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    Disagreement,
    Abstention,
    Incomplete,
}

impl fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExclusionReason::Disagreement => "disagreement",
            ExclusionReason::Abstention => "abstention",
            ExclusionReason::Incomplete => "incomplete",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Collation {
    /// Pairs with a unanimous mark, sorted by id.
    pub included: Vec<(String, ClassLabel)>,
    /// Every other pair with its single reason, sorted by id.
    pub excluded: Vec<(String, ExclusionReason)>,
}

impl Collation {
    pub fn count(&self, label: ClassLabel) -> usize {
        self.included.iter().filter(|(_, l)| *l == label).count()
    }

    pub fn excluded_for(&self, reason: ExclusionReason) -> usize {
        self.excluded.iter().filter(|(_, r)| *r == reason).count()
    }
}

/// Keeps the pairs every annotator marked with the same non-abstain label.
///
/// A pair judged by fewer than `annotators_required` annotators is
/// `incomplete`; otherwise any abstention makes it `abstention`, and mixed
/// marks make it `disagreement`.
pub fn collate_unanimous(records: &[AnnotationRecord], annotators_required: usize) -> Result<Collation, EvalError> {
    if annotators_required == 0 {
        return Err(EvalError::Config("annotators_required must be positive".into()));
    }
    let mut seen: HashSet<(&str, &str)> = HashSet::with_capacity(records.len());
    let mut by_pair: BTreeMap<&str, Vec<Option<ClassLabel>>> = BTreeMap::new();
    for r in records {
        if !seen.insert((&r.pair_id, &r.annotator_id)) {
            return Err(EvalError::DuplicateAnnotation {
                pair_id: r.pair_id.clone(),
                annotator_id: r.annotator_id.clone(),
            });
        }
        by_pair.entry(&r.pair_id).or_default().push(r.mark);
    }
    let mut out = Collation::default();
    for (id, marks) in by_pair {
        let reason = if marks.len() < annotators_required {
            Some(ExclusionReason::Incomplete)
        } else if marks.iter().any(Option::is_none) {
            Some(ExclusionReason::Abstention)
        } else if marks.windows(2).any(|w| w[0] != w[1]) {
            Some(ExclusionReason::Disagreement)
        } else {
            None
        };
        match reason {
            Some(r) => out.excluded.push((id.to_string(), r)),
            None => out.included.push((id.to_string(), marks[0].expect("checked above"))),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use ClassLabel::*;

    fn pair(id: &str, marks: &[Option<ClassLabel>]) -> Vec<AnnotationRecord> {
        marks
            .iter()
            .enumerate()
            .map(|(i, m)| AnnotationRecord::new(id, format!("a{i}"), *m))
            .collect()
    }

    #[test]
    fn unanimity_rule() {
        let mut recs = pair("p1", &[Some(Ne), Some(Ne), Some(Ne)]);
        recs.extend(pair("p2", &[Some(Ot), Some(Ne), Some(Ot)]));
        recs.extend(pair("p3", &[Some(Ut), Some(Ut), None]));
        recs.extend(pair("p4", &[Some(Ut), Some(Ut)]));
        recs.extend(pair("p5", &[Some(Ot), None]));
        let c = collate_unanimous(&recs, 3).unwrap();
        assert_eq!(c.included, vec![("p1".to_string(), Ne)]);
        assert_eq!(
            c.excluded,
            vec![
                ("p2".to_string(), ExclusionReason::Disagreement),
                ("p3".to_string(), ExclusionReason::Abstention),
                ("p4".to_string(), ExclusionReason::Incomplete),
                ("p5".to_string(), ExclusionReason::Incomplete),
            ]
        );
    }

    #[test]
    fn duplicate_annotation_is_an_error() {
        let recs = vec![
            AnnotationRecord::new("p", "a", Some(Ne)),
            AnnotationRecord::new("p", "a", Some(Ot)),
        ];
        assert!(matches!(
            collate_unanimous(&recs, 3),
            Err(EvalError::DuplicateAnnotation { .. })
        ));
    }

    fn mark() -> impl Strategy<Value = Option<ClassLabel>> {
        prop_oneof![Just(None), (0usize..3).prop_map(|i| ClassLabel::from_index(i))]
    }

    proptest! {
        #[test]
        fn partitions_pairs(groups in prop::collection::vec(prop::collection::vec(mark(), 0..5), 0..40)) {
            let mut recs = Vec::new();
            for (i, g) in groups.iter().enumerate() {
                recs.extend(pair(&format!("p{i:03}"), g));
            }
            let n_pairs = groups.iter().filter(|g| !g.is_empty()).count();
            let c = collate_unanimous(&recs, 3).unwrap();
            prop_assert!(c.included.len() <= n_pairs);
            prop_assert_eq!(c.included.len() + c.excluded.len(), n_pairs);
            let ids: HashSet<&String> = c.included.iter().map(|p| &p.0).chain(c.excluded.iter().map(|p| &p.0)).collect();
            prop_assert_eq!(ids.len(), n_pairs);
        }
    }
}
