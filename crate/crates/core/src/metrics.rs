//! Ranking metrics: Spearman, Pearson, NDCG of the top fraction and their
//! combined score.
//!
//! NDCG uses truth percentiles as linear relevance, a `1 / log2(i + 1)`
//! discount and `k = ceil(fraction * n)`. Prediction ties are broken by input
//! order.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ranks::{average_ranks, cmp_f64, percentiles};

pub const DEFAULT_NDCG_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("input vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 values, got {0}")]
    TooShort(usize),
    #[error("input vector is constant")]
    ConstantInput,
    #[error("ndcg fraction must lie in (0, 1], got {0}")]
    BadFraction(f64),
}

/// Which score drives model and feature selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
#[derive(Default)]
pub enum MetricKind {
    Spearman,
    NdcgTopFraction { fraction: f64 },
    #[default]
    Combined,
}


impl MetricKind {
    pub fn evaluate(&self, pred: &[f64], truth: &[f64]) -> Result<f64, MetricError> {
        match *self {
            MetricKind::Spearman => spearman(pred, truth),
            MetricKind::NdcgTopFraction { fraction } => ndcg_top_fraction(pred, truth, fraction),
            MetricKind::Combined => combined_score(pred, truth),
        }
    }
}

fn check_lengths(x: &[f64], y: &[f64]) -> Result<(), MetricError> {
    if x.len() != y.len() {
        return Err(MetricError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(MetricError::TooShort(x.len()));
    }
    Ok(())
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, MetricError> {
    check_lengths(x, y)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MetricError::ConstantInput);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Spearman rank correlation: Pearson correlation of average ranks.
pub fn spearman(pred: &[f64], truth: &[f64]) -> Result<f64, MetricError> {
    check_lengths(pred, truth)?;
    pearson(&average_ranks(pred), &average_ranks(truth))
}

/// NDCG over the top `ceil(fraction * n)` predicted items.
pub fn ndcg_top_fraction(pred: &[f64], truth: &[f64], fraction: f64) -> Result<f64, MetricError> {
    check_lengths(pred, truth)?;
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(MetricError::BadFraction(fraction));
    }
    let n = pred.len();
    let k = top_count(n, fraction);
    let rel = percentiles(truth);

    let mut by_pred: Vec<usize> = (0..n).collect();
    by_pred.sort_by(|&a, &b| cmp_f64(pred[b], pred[a]).then(a.cmp(&b)));
    let mut ideal = rel.clone();
    ideal.sort_by(|a, b| cmp_f64(*b, *a));

    let dcg: f64 = (0..k).map(|i| rel[by_pred[i]] * discount(i)).sum();
    let idcg: f64 = (0..k).map(|i| ideal[i] * discount(i)).sum();
    if idcg == 0.0 {
        // every truth value tied at rank zero cannot happen for n >= 2
        return Ok(1.0);
    }
    Ok(dcg / idcg)
}

/// `ceil(fraction * n)`, ignoring floating-point dust just above an integer.
pub fn top_count(n: usize, fraction: f64) -> usize {
    let raw = fraction * n as f64;
    let k = (raw - 1e-9).ceil().max(1.0) as usize;
    k.min(n)
}

fn discount(position: usize) -> f64 {
    1.0 / ((position + 2) as f64).log2()
}

/// Mean of Spearman and NDCG of the top 20%.
pub fn combined_score(pred: &[f64], truth: &[f64]) -> Result<f64, MetricError> {
    let s = spearman(pred, truth)?;
    let g = ndcg_top_fraction(pred, truth, DEFAULT_NDCG_FRACTION)?;
    Ok((s + g) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn spearman_fixtures() {
        let truth = [0.1, 0.4, 0.2, 0.9];
        let pred = [0.2, 0.3, 0.1, 0.5];
        assert_abs_diff_eq!(spearman(&pred, &truth).unwrap(), 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(
            spearman(&[1.0, 2.0, 3.0], &[1.0, 1.0, 2.0]).unwrap(),
            0.75f64.sqrt(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 5.0, 9.0]).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(spearman(&[1.0, 2.0, 3.0], &[9.0, 5.0, 3.0]).unwrap(), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn pearson_fixtures() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
        assert_abs_diff_eq!(pearson(&x, &y).unwrap(), 1.0, epsilon = 1e-15);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_abs_diff_eq!(pearson(&x, &neg).unwrap(), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pearson(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn error_paths() {
        assert_eq!(spearman(&[1.0, 2.0], &[1.0]), Err(MetricError::LengthMismatch(2, 1)));
        assert_eq!(spearman(&[1.0, 1.0], &[1.0, 2.0]), Err(MetricError::ConstantInput));
        assert_eq!(pearson(&[1.0], &[1.0]), Err(MetricError::TooShort(1)));
        assert!(matches!(
            ndcg_top_fraction(&[1.0, 2.0], &[1.0, 2.0], 0.0),
            Err(MetricError::BadFraction(_))
        ));
    }

    #[test]
    fn ndcg_counts_top_fifth() {
        assert_eq!(top_count(10, 0.2), 2);
        assert_eq!(top_count(15, 0.2), 3);
        assert_eq!(top_count(11, 0.2), 3);
        assert_eq!(top_count(3, 0.2), 1);
        let truth: Vec<f64> = (0..10).map(f64::from).collect();
        assert_eq!(ndcg_top_fraction(&truth, &truth, 0.2).unwrap(), 1.0);
    }

    #[test]
    fn ndcg_third_then_first() {
        // truth 0..9: best is index 9, third best is index 7
        let truth: Vec<f64> = (0..10).map(f64::from).collect();
        let mut pred = vec![0.0; 10];
        pred[7] = 10.0;
        pred[9] = 9.0;
        let got = ndcg_top_fraction(&pred, &truth, 0.2).unwrap();
        let dcg = 7.0 / 9.0 + 1.0 / 3f64.log2();
        let idcg = 1.0 + (8.0 / 9.0) / 3f64.log2();
        assert_abs_diff_eq!(got, dcg / idcg, epsilon = 1e-15);
        assert_abs_diff_eq!(got, 0.9026, epsilon = 1e-4);
    }

    #[test]
    fn combined_perfect_is_one() {
        let v: Vec<f64> = (0..20).map(|i| (i * 7 % 20) as f64).collect();
        assert_eq!(combined_score(&v, &v).unwrap(), 1.0);
    }
}
