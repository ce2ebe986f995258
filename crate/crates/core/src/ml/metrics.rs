//! Regression and binary classification metrics.

use serde::Serialize;

use crate::cohort::Label;
use crate::error::{Error, Result};

pub fn mae(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_len(pred.len(), truth.len())?;
    Ok(pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum::<f64>() / pred.len() as f64)
}

/// `1 − SS_res / SS_tot`, with `SS_tot` around the mean of `truth`.
pub fn r_squared(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_len(pred.len(), truth.len())?;
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let ss_res: f64 = pred.iter().zip(truth).map(|(p, t)| (t - p) * (t - p)).sum();
    let ss_tot: f64 = truth.iter().map(|t| (t - mean) * (t - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::InvalidInput("R² undefined for constant targets".into()));
    }
    Ok(1.0 - ss_res / ss_tot)
}

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::dims(b, a));
    }
    if a == 0 {
        return Err(Error::EmptyInput("metric inputs"));
    }
    Ok(())
}

/// Area under the ROC curve with `B` as the positive class, via the
/// Mann–Whitney statistic on midranks (tied pairs count one half).
pub fn auc(scores: &[f64], truth: &[Label]) -> Result<f64> {
    check_len(scores.len(), truth.len())?;
    let n_pos = truth.iter().filter(|l| l.is_positive()).count();
    let n_neg = truth.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass("AUC"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // 1-based ranks i+1..=j+1 share their mean.
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = mid;
        }
        i = j + 1;
    }
    let rank_sum: f64 = ranks.iter().zip(truth).filter(|(_, l)| l.is_positive()).map(|(r, _)| r).sum();
    let (np, nn) = (n_pos as f64, n_neg as f64);
    Ok((rank_sum - np * (np + 1.0) / 2.0) / (np * nn))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinaryMetrics {
    pub accuracy: f64,
    pub auc: f64,
    /// Recall of class `B`.
    pub sensitivity: f64,
    /// Recall of class `A`.
    pub specificity: f64,
}

pub fn binary_metrics(scores: &[f64], predictions: &[Label], truth: &[Label]) -> Result<BinaryMetrics> {
    check_len(predictions.len(), truth.len())?;
    let auc = auc(scores, truth)?;
    let mut tp = 0usize;
    let mut tn = 0usize;
    let mut pos = 0usize;
    for (&p, &t) in predictions.iter().zip(truth) {
        if t.is_positive() {
            pos += 1;
            tp += usize::from(p == t);
        } else {
            tn += usize::from(p == t);
        }
    }
    let neg = truth.len() - pos;
    Ok(BinaryMetrics {
        accuracy: (tp + tn) as f64 / truth.len() as f64,
        auc,
        sensitivity: tp as f64 / pos as f64,
        specificity: tn as f64 / neg as f64,
    })
}
