//! Two-group one-way ANOVA F scores for univariate feature ranking.

use nalgebra::DMatrix;

use crate::cohort::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AnovaSelection {
    /// Selected feature indices, highest F first.
    pub indices: Vec<usize>,
    /// F score of every feature.
    pub scores: Vec<f64>,
}

/// F = between-group mean square / within-group mean square, per column.
///
/// A column with no spread scores 0; a column whose spread is entirely
/// between groups scores `+inf`.
pub fn anova_f_scores(x: &DMatrix<f64>, labels: &[Label]) -> Result<Vec<f64>> {
    let m = x.nrows();
    if labels.len() != m {
        return Err(Error::dims(m, labels.len()));
    }
    let nb = labels.iter().filter(|l| l.is_positive()).count();
    let na = m - nb;
    for (group, size) in [("A", na), ("B", nb)] {
        if size == 0 {
            return Err(Error::DegenerateGroup { group, size, required: 1 });
        }
    }
    let df_within = m.saturating_sub(2).max(1) as f64;
    Ok(x
        .column_iter()
        .map(|col| {
            let (mut sa, mut sb) = (0.0, 0.0);
            for (v, l) in col.iter().zip(labels) {
                if l.is_positive() { sb += v } else { sa += v }
            }
            let (ma, mb) = (sa / na as f64, sb / nb as f64);
            let mean = (sa + sb) / m as f64;
            let mut within = 0.0;
            let mut total = 0.0;
            for (v, l) in col.iter().zip(labels) {
                let g = if l.is_positive() { mb } else { ma };
                within += (v - g) * (v - g);
                total += (v - mean) * (v - mean);
            }
            let between = na as f64 * (ma - mean).powi(2) + nb as f64 * (mb - mean).powi(2);
            let scale = col.amax().max(f64::MIN_POSITIVE);
            if total <= (1e-12 * scale).powi(2) * m as f64 {
                0.0
            } else if within <= 1e-12 * total {
                f64::INFINITY
            } else {
                between / (within / df_within)
            }
        })
        .collect())
}

/// Indices of the `top_k` largest F scores; equal scores keep index order.
pub fn anova_f_select(x: &DMatrix<f64>, labels: &[Label], top_k: usize) -> Result<AnovaSelection> {
    let scores = anova_f_scores(x, labels)?;
    Ok(AnovaSelection {
        indices: rank_by_score(&scores).into_iter().take(top_k).collect(),
        scores,
    })
}

/// All indices, highest score first, stable on ties.
pub(crate) fn rank_by_score(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{A, B};

    #[test]
    fn f_examples() {
        // columns: constant, perfectly separated, mixed
        let x = DMatrix::from_row_slice(4, 3, &[3.0, 0.0, 1.0, 3.0, 0.0, 2.0, 3.0, 1.0, 2.0, 3.0, 1.0, 4.0]);
        let labels = [A, A, B, B];
        let sel = anova_f_select(&x, &labels, 2).unwrap();
        assert_eq!(sel.scores[0], 0.0);
        assert_eq!(sel.scores[1], f64::INFINITY);
        assert!(sel.scores[2].is_finite() && sel.scores[2] > 0.0);
        assert_eq!(sel.indices, vec![1, 2]);
        let all = anova_f_select(&x, &labels, 3).unwrap();
        assert_eq!(all.indices.len(), 3);
    }

    #[test]
    fn mixed_column_matches_hand_value() {
        // A = {1, 2}, B = {2, 4}: means 1.5, 3; grand 2.25
        // between = 2·0.5625 + 2·0.5625 = 2.25; within = 0.5 + 2 = 2.5, df 2
        let x = DMatrix::from_column_slice(4, 1, &[1.0, 2.0, 2.0, 4.0]);
        let f = anova_f_scores(&x, &[A, A, B, B]).unwrap();
        assert!((f[0] - 2.25 / 1.25).abs() < 1e-12);
    }

    #[test]
    fn ties_prefer_lower_index() {
        let x = DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        let sel = anova_f_select(&x, &[A, A, B, B], 1).unwrap();
        assert_eq!(sel.indices, vec![0]);
    }

    #[test]
    fn needs_both_groups() {
        let x = DMatrix::zeros(3, 1);
        assert!(matches!(anova_f_scores(&x, &[A, A, A]), Err(Error::DegenerateGroup { .. })));
    }
}
