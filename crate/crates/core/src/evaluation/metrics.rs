use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::models::ClassLabel;

/// Gold-by-predicted counts, indexed `[gold][pred]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion(pub [[usize; 3]; 3]);

impl Confusion {
    pub fn from_labels(gold: &[ClassLabel], pred: &[ClassLabel]) -> Result<Self, EvalError> {
        if gold.len() != pred.len() {
            return Err(EvalError::LengthMismatch {
                gold: gold.len(),
                pred: pred.len(),
            });
        }
        if gold.is_empty() {
            return Err(EvalError::Empty);
        }
        let mut m = [[0usize; 3]; 3];
        for (g, p) in gold.iter().zip(pred) {
            m[g.index()][p.index()] += 1;
        }
        Ok(Confusion(m))
    }

    pub fn total(&self) -> usize {
        self.0.iter().flatten().sum()
    }

    pub fn gold_support(&self, c: ClassLabel) -> usize {
        self.0[c.index()].iter().sum()
    }

    pub fn predicted(&self, c: ClassLabel) -> usize {
        self.0.iter().map(|row| row[c.index()]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        let hits: usize = (0..3).map(|i| self.0[i][i]).sum();
        hits as f64 / self.total() as f64
    }

    /// F1 of one class; 0 when precision and recall are both undefined or zero.
    pub fn f1(&self, c: ClassLabel) -> f64 {
        let tp = self.0[c.index()][c.index()] as f64;
        let (pred, gold) = (self.predicted(c) as f64, self.gold_support(c) as f64);
        if tp == 0.0 {
            return 0.0;
        }
        let (p, r) = (tp / pred, tp / gold);
        2.0 * p * r / (p + r)
    }

    pub fn weighted_f1(&self) -> f64 {
        let n = self.total() as f64;
        ClassLabel::ALL
            .iter()
            .map(|&c| self.gold_support(c) as f64 / n * self.f1(c))
            .sum()
    }

    /// Share of gold OT/UT samples predicted as either error class, or
    /// `None` without gold errors.
    pub fn error_recall(&self) -> Option<f64> {
        let errors = [ClassLabel::Ot, ClassLabel::Ut];
        let gold: usize = errors.iter().map(|&c| self.gold_support(c)).sum();
        let flagged: usize = errors
            .iter()
            .flat_map(|&g| errors.iter().map(move |&p| (g, p)))
            .map(|(g, p)| self.0[g.index()][p.index()])
            .sum();
        (gold > 0).then(|| flagged as f64 / gold as f64)
    }
}

/// Fraction of exact matches.
pub fn accuracy(gold: &[ClassLabel], pred: &[ClassLabel]) -> Result<f64, EvalError> {
    Ok(Confusion::from_labels(gold, pred)?.accuracy())
}

/// Per-class F1 weighted by gold support.
pub fn weighted_f1(gold: &[ClassLabel], pred: &[ClassLabel]) -> Result<f64, EvalError> {
    Ok(Confusion::from_labels(gold, pred)?.weighted_f1())
}

/// Among gold OT/UT samples, the fraction flagged as any error class.
pub fn error_recall(gold: &[ClassLabel], pred: &[ClassLabel]) -> Result<f64, EvalError> {
    Confusion::from_labels(gold, pred)?
        .error_recall()
        .ok_or(EvalError::NoGoldErrors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use ClassLabel::*;

    // Brute-force oracles: enumerate every (gold, pred) cell explicitly and
    // count matching positions with a fresh scan per cell.
    fn cell(gold: &[ClassLabel], pred: &[ClassLabel], g: ClassLabel, p: ClassLabel) -> f64 {
        gold.iter().zip(pred).filter(|(a, b)| **a == g && **b == p).count() as f64
    }

    fn oracle_accuracy(gold: &[ClassLabel], pred: &[ClassLabel]) -> f64 {
        ClassLabel::ALL.iter().map(|&c| cell(gold, pred, c, c)).sum::<f64>() / gold.len() as f64
    }

    fn oracle_weighted_f1(gold: &[ClassLabel], pred: &[ClassLabel]) -> f64 {
        let mut total = 0.0;
        for c in ClassLabel::ALL {
            let tp = cell(gold, pred, c, c);
            let fp: f64 = ClassLabel::ALL.iter().filter(|&&g| g != c).map(|&g| cell(gold, pred, g, c)).sum();
            let fn_: f64 = ClassLabel::ALL.iter().filter(|&&p| p != c).map(|&p| cell(gold, pred, c, p)).sum();
            let f1 = if 2.0 * tp + fp + fn_ == 0.0 { 0.0 } else { 2.0 * tp / (2.0 * tp + fp + fn_) };
            total += (tp + fn_) * f1;
        }
        total / gold.len() as f64
    }

    fn oracle_error_recall(gold: &[ClassLabel], pred: &[ClassLabel]) -> Option<f64> {
        let errs = [Ot, Ut];
        let gold_errs: f64 = errs.iter().flat_map(|&g| ClassLabel::ALL.map(|p| cell(gold, pred, g, p))).sum();
        let flagged: f64 = errs.iter().flat_map(|&g| errs.map(|p| cell(gold, pred, g, p))).sum();
        (gold_errs > 0.0).then(|| flagged / gold_errs)
    }

    fn labels(v: &[u8]) -> Vec<ClassLabel> {
        v.iter().map(|&i| ClassLabel::from_index(i as usize).unwrap()).collect()
    }

    #[test]
    fn hand_counted_examples() {
        assert_eq!(accuracy(&[Ne, Ot, Ut, Ne], &[Ne, Ut, Ut, Ot]).unwrap(), 0.5);
        let f = weighted_f1(&[Ne, Ne, Ot], &[Ne, Ne, Ne]).unwrap();
        assert!((f - 1.6 / 3.0).abs() < 1e-12, "{f}");
        let r = error_recall(&[Ot, Ut, Ne, Ut], &[Ut, Ne, Ne, Ut]).unwrap();
        assert!((r - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(error_recall(&[Ot, Ut], &[Ne, Ne]).unwrap(), 0.0);
        assert_eq!(error_recall(&[Ot, Ut], &[Ut, Ot]).unwrap(), 1.0);
        assert_eq!(weighted_f1(&[Ot, Ot], &[Ot, Ot]).unwrap(), 1.0);
    }

    #[test]
    fn preconditions() {
        assert!(matches!(accuracy(&[], &[]), Err(EvalError::Empty)));
        assert!(matches!(accuracy(&[Ne], &[Ne, Ot]), Err(EvalError::LengthMismatch { .. })));
        assert!(matches!(error_recall(&[Ne], &[Ot]), Err(EvalError::NoGoldErrors)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn metrics_match_oracles(pairs in prop::collection::vec((0u8..3, 0u8..3), 1..500)) {
            let gold = labels(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
            let pred = labels(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
            prop_assert!((accuracy(&gold, &pred).unwrap() - oracle_accuracy(&gold, &pred)).abs() < 1e-9);
            prop_assert!((weighted_f1(&gold, &pred).unwrap() - oracle_weighted_f1(&gold, &pred)).abs() < 1e-9);
            match oracle_error_recall(&gold, &pred) {
                Some(r) => prop_assert!((error_recall(&gold, &pred).unwrap() - r).abs() < 1e-9),
                None => prop_assert!(error_recall(&gold, &pred).is_err()),
            }
        }

        #[test]
        fn error_recall_ignores_ot_ut_swaps(pairs in prop::collection::vec((1u8..3, 0u8..3), 1..200)) {
            let gold = labels(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
            let pred = labels(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
            let swapped: Vec<ClassLabel> = pred
                .iter()
                .map(|l| match l { Ot => Ut, Ut => Ot, Ne => Ne })
                .collect();
            prop_assert_eq!(error_recall(&gold, &pred).unwrap(), error_recall(&gold, &swapped).unwrap());
        }

        #[test]
        fn balanced_gold_makes_weighted_equal_macro(per in 1usize..40, preds in prop::collection::vec(0u8..3, 120)) {
            let gold: Vec<ClassLabel> = (0..3 * per).map(|i| ClassLabel::from_index(i % 3).unwrap()).collect();
            let pred = labels(&preds[..3 * per]);
            let c = Confusion::from_labels(&gold, &pred).unwrap();
            let macro_f1 = ClassLabel::ALL.iter().map(|&l| c.f1(l)).sum::<f64>() / 3.0;
            prop_assert!((c.weighted_f1() - macro_f1).abs() < 1e-12);
        }
    }
}
