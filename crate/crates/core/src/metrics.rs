//! Binary classification metrics for imbalanced fraud data.
//!
//! Positive-class (fraud) precision, recall and F1 are the primary numbers;
//! macro averages over both classes are reported alongside because tabulated
//! results in this area are often macro-averaged without saying so.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Absent when computed from hard predictions only.
    pub auc: Option<f64>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub confusion: Confusion,
    pub n_rows: usize,
}

/// `num / den`, or 0 when `den` is 0.
fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn confusion(labels: &[u8], predictions: &[u8]) -> Result<Confusion> {
    if labels.len() != predictions.len() {
        return Err(Error::DimensionMismatch { expected: labels.len(), found: predictions.len() });
    }
    let mut c = Confusion::default();
    for (&y, &p) in labels.iter().zip(predictions) {
        match (y != 0, p != 0) {
            (true, true) => c.tp += 1,
            (false, true) => c.fp += 1,
            (false, false) => c.tn += 1,
            (true, false) => c.fn_ += 1,
        }
    }
    Ok(c)
}

pub fn classification_report(labels: &[u8], predictions: &[u8]) -> Result<EvalReport> {
    if labels.is_empty() {
        return Err(Error::Empty("classification_report needs at least one row"));
    }
    let c = confusion(labels, predictions)?;
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    // The negative class mirrors the counts.
    let neg_precision = ratio(c.tn, c.tn + c.fn_);
    let neg_recall = ratio(c.tn, c.tn + c.fp);
    Ok(EvalReport {
        precision,
        recall,
        f1: f1(precision, recall),
        auc: None,
        macro_precision: 0.5 * (precision + neg_precision),
        macro_recall: 0.5 * (recall + neg_recall),
        macro_f1: 0.5 * (f1(precision, recall) + f1(neg_precision, neg_recall)),
        confusion: c,
        n_rows: labels.len(),
    })
}

/// Area under the ROC curve as the Mann–Whitney statistic with midranks for
/// tied scores.
pub fn auc(labels: &[u8], scores: &[f64]) -> Result<f64> {
    if labels.len() != scores.len() {
        return Err(Error::DimensionMismatch { expected: labels.len(), found: scores.len() });
    }
    let n_pos = labels.iter().filter(|&&y| y != 0).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::InvalidParameter("auc needs both classes present".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut pos_rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // Ranks i+1 ..= j share their mean.
        let midrank = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            if labels[k] != 0 {
                pos_rank_sum += midrank;
            }
        }
        i = j;
    }
    let u = pos_rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Full report from scores and a decision threshold (`score >= threshold`
/// predicts fraud). AUC is omitted when only one class is present.
pub fn evaluate_scores(labels: &[u8], scores: &[f64], threshold: f64) -> Result<EvalReport> {
    let predictions: Vec<u8> = scores.iter().map(|&s| u8::from(s >= threshold)).collect();
    let mut report = classification_report(labels, &predictions)?;
    report.auc = auc(labels, scores).ok();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_report() {
        let r = classification_report(&[1, 0, 1, 1], &[1, 0, 0, 1]).unwrap();
        assert_eq!(r.precision, 1.0);
        assert!((r.recall - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.f1 - 0.8).abs() < 1e-12);
        assert_eq!(r.confusion, Confusion { tp: 2, fp: 0, tn: 1, fn_: 1 });
    }

    #[test]
    fn perfect_and_degenerate_predictors() {
        let y = [0, 1, 1, 0, 1];
        let r = classification_report(&y, &y).unwrap();
        assert_eq!((r.precision, r.recall, r.f1), (1.0, 1.0, 1.0));
        let r = classification_report(&y, &[0; 5]).unwrap();
        assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(classification_report(&[1, 0], &[1]).is_err());
        assert!(auc(&[1, 0], &[0.1]).is_err());
    }

    #[test]
    fn auc_fixtures() {
        assert_eq!(auc(&[1, 1, 0, 0], &[0.9, 0.8, 0.2, 0.1]).unwrap(), 1.0);
        assert_eq!(auc(&[1, 0, 1, 0], &[0.5; 4]).unwrap(), 0.5);
        assert_eq!(auc(&[1, 0, 1, 0], &[0.9, 0.8, 0.3, 0.1]).unwrap(), 0.75);
        assert!(auc(&[1, 1], &[0.2, 0.3]).is_err());
    }
}
