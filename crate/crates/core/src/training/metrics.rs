use serde::{Deserialize, Serialize};

use crate::corpus::UnifiedLabel;
use crate::error::{Error, Result};

const K: usize = 3;

/// Confusion counts and the F1 scores derived from them.
///
/// `confusion[t][p]` counts records with true class `t` predicted as `p`.
/// Any ratio with a zero denominator is defined as 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub confusion: [[usize; K]; K],
    pub precision: [f64; K],
    pub recall: [f64; K],
    pub f1: [f64; K],
    pub support: [usize; K],
    pub f1_hate: f64,
    /// Support-weighted mean of the per-class F1 scores.
    pub f1_overall: f64,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl Metrics {
    pub fn from_confusion(confusion: [[usize; K]; K]) -> Result<Self> {
        let n: usize = confusion.iter().flatten().sum();
        if n == 0 {
            return Err(Error::EmptyEvaluation);
        }
        let mut precision = [0.0; K];
        let mut recall = [0.0; K];
        let mut f1 = [0.0; K];
        let mut support = [0; K];
        for c in 0..K {
            let tp = confusion[c][c];
            let predicted: usize = (0..K).map(|t| confusion[t][c]).sum();
            support[c] = confusion[c].iter().sum();
            precision[c] = ratio(tp, predicted);
            recall[c] = ratio(tp, support[c]);
            let denom = precision[c] + recall[c];
            f1[c] = if denom == 0.0 {
                0.0
            } else {
                2.0 * precision[c] * recall[c] / denom
            };
        }
        let f1_overall = (0..K).map(|c| support[c] as f64 * f1[c]).sum::<f64>() / n as f64;
        Ok(Self {
            confusion,
            precision,
            recall,
            f1,
            support,
            f1_hate: f1[UnifiedLabel::Hate.index()],
            f1_overall,
        })
    }

    pub fn from_pairs(
        pairs: impl IntoIterator<Item = (UnifiedLabel, UnifiedLabel)>,
    ) -> Result<Self> {
        let mut confusion = [[0; K]; K];
        for (t, p) in pairs {
            confusion[t.index()][p.index()] += 1;
        }
        Self::from_confusion(confusion)
    }

    pub fn total(&self) -> usize {
        self.support.iter().sum()
    }

    /// Column total for the hate class.
    pub fn predicted_hate(&self) -> usize {
        let h = UnifiedLabel::Hate.index();
        (0..K).map(|t| self.confusion[t][h]).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use UnifiedLabel::*;

    #[test]
    fn perfect_predictions() {
        let m = Metrics::from_pairs([(None, None), (Abusive, Abusive), (Hate, Hate), (Hate, Hate)])
            .unwrap();
        assert_eq!(m.f1_hate, 1.0);
        assert_eq!(m.f1_overall, 1.0);
    }

    #[test]
    fn hand_computed_hate_slice() {
        // TP=3, FN=2, FP=0: precision 1, recall 0.6, F1 = 2·0.6/1.6
        let pairs = [(Hate, Hate); 3]
            .into_iter()
            .chain([(Hate, None); 2])
            .chain([(None, None); 4]);
        let m = Metrics::from_pairs(pairs).unwrap();
        assert_eq!(m.precision[2], 1.0);
        assert!((m.recall[2] - 0.6).abs() < 1e-15);
        assert!((m.f1_hate - 0.75).abs() < 1e-15);
    }

    #[test]
    fn all_none_predictions() {
        let m = Metrics::from_pairs([(Hate, None), (None, None), (Abusive, None)]).unwrap();
        assert_eq!(m.f1_hate, 0.0);
        assert_eq!(m.precision[1], 0.0);
    }

    #[test]
    fn empty_is_an_error() {
        assert!(matches!(
            Metrics::from_confusion([[0; 3]; 3]),
            Err(Error::EmptyEvaluation)
        ));
    }

    proptest! {
        #[test]
        fn derived_from_confusion(cells in proptest::array::uniform9(0usize..20)) {
            let mut conf = [[0; 3]; 3];
            for (i, v) in cells.iter().enumerate() {
                conf[i / 3][i % 3] = *v;
            }
            let n: usize = cells.iter().sum();
            prop_assume!(n > 0);
            let m = Metrics::from_confusion(conf).unwrap();
            let mut weighted = 0.0;
            for c in 0..3 {
                prop_assert_eq!(m.support[c], conf[c].iter().sum::<usize>());
                prop_assert!((0.0..=1.0).contains(&m.f1[c]));
                // F1 = 2TP / (2TP + FP + FN)
                let tp = conf[c][c];
                let fp: usize = (0..3).filter(|&t| t != c).map(|t| conf[t][c]).sum();
                let fn_: usize = (0..3).filter(|&p| p != c).map(|p| conf[c][p]).sum();
                let alt = if tp == 0 { 0.0 } else { 2.0 * tp as f64 / (2 * tp + fp + fn_) as f64 };
                prop_assert!((alt - m.f1[c]).abs() < 1e-12);
                weighted += m.support[c] as f64 / n as f64 * m.f1[c];
            }
            prop_assert!((weighted - m.f1_overall).abs() < 1e-12);
        }
    }
}
