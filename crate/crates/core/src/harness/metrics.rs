use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::model::{EncodedInstance, FakeNewsModel};

/// Binary classification metrics with fake as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Metrics {
    /// Undefined precision or recall count as 0, and F is 0 when P + R = 0.
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, tn: usize) -> Self {
        let div = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = div(tp, tp + fp);
        let recall = div(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            precision,
            recall,
            f1,
            accuracy: div(tp + tn, tp + fp + fn_ + tn),
            tp,
            fp,
            fn_,
            tn,
        }
    }

    pub fn from_labels(gold: &[Label], predicted: &[Label]) -> Self {
        let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
        for (g, p) in gold.iter().zip(predicted) {
            match (g.is_fake(), p.is_fake()) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                (false, false) => tn += 1,
            }
        }
        Self::from_counts(tp, fp, fn_, tn)
    }
}

pub fn predict_all(model: &FakeNewsModel, split: &[EncodedInstance]) -> Result<Vec<Label>> {
    split
        .par_iter()
        .map(|inst| model.predict(inst).map(|p| p.label))
        .collect()
}

pub fn evaluate(model: &FakeNewsModel, split: &[EncodedInstance]) -> Result<Metrics> {
    if split.is_empty() {
        return Err(Error::EmptySplit);
    }
    let predicted = predict_all(model, split)?;
    let gold: Vec<Label> = split.iter().map(|i| i.label).collect();
    Ok(Metrics::from_labels(&gold, &predicted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Fake, Real};

    #[test]
    fn perfect_predictions() {
        let g = [Fake, Real, Fake];
        let m = Metrics::from_labels(&g, &g);
        assert_eq!((m.precision, m.recall, m.f1, m.accuracy), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn no_fake_predicted() {
        let m = Metrics::from_labels(&[Fake, Real], &[Real, Real]);
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn hand_counts() {
        let m = Metrics::from_counts(2, 1, 1, 0);
        for v in [m.precision, m.recall, m.f1] {
            assert!((v - 2.0 / 3.0).abs() < 1e-15);
        }
    }
}
