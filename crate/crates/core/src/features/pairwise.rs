use serde::{Deserialize, Serialize};

use super::{FeatureError, FeatureMatrix};

pub const RATIO_EPSILON: f64 = 1e-8;

/// Combination applied to each unordered pair of mean features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairOp {
    Product,
    Difference,
    Ratio,
}

impl PairOp {
    pub fn name(&self) -> &'static str {
        match self {
            PairOp::Product => "product",
            PairOp::Difference => "difference",
            PairOp::Ratio => "ratio",
        }
    }

    pub fn apply(&self, a: f64, b: f64) -> f64 {
        match self {
            PairOp::Product => a * b,
            PairOp::Difference => a - b,
            PairOp::Ratio => {
                let sign = if b < 0.0 { -1.0 } else { 1.0 };
                a / (b + RATIO_EPSILON * sign)
            }
        }
    }
}

/// New columns `syn_{op}_{a}_{b}` for every pair `a < b` in column order.
/// Pairs are the outer loop, operations the inner one.
pub fn synthetic_pairwise(means: &FeatureMatrix, ops: &[PairOp]) -> Result<FeatureMatrix, FeatureError> {
    let mut out = FeatureMatrix::empty(means.row_ids().to_vec());
    let names = means.names();
    let cols = means.columns();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            for op in ops {
                let values = cols[i].iter().zip(&cols[j]).map(|(&a, &b)| op.apply(a, b)).collect();
                out.push_column(format!("syn_{}_{}_{}", op.name(), names[i], names[j]), values)?;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_pair() {
        let m = FeatureMatrix::from_rows(&["a", "b"], &[vec![2.0, 4.0]]).unwrap();
        let s = synthetic_pairwise(&m, &[PairOp::Product, PairOp::Difference, PairOp::Ratio]).unwrap();
        assert_eq!(s.names(), &["syn_product_a_b", "syn_difference_a_b", "syn_ratio_a_b"]);
        assert_eq!(s.row(0)[..2], [8.0, -2.0]);
        assert_abs_diff_eq!(s.row(0)[2], 0.5, epsilon = 1e-8);
    }

    #[test]
    fn zero_denominator_is_guarded() {
        assert_eq!(PairOp::Ratio.apply(3.0, 0.0), 3.0 / RATIO_EPSILON);
        assert!(PairOp::Ratio.apply(3.0, -0.0).is_finite());
        assert!(PairOp::Ratio.apply(3.0, -RATIO_EPSILON).is_finite());
    }

    #[test]
    fn column_count_is_pairs_times_ops() {
        let m = FeatureMatrix::from_rows(&["a", "b", "c"], &[vec![1.0, 2.0, 3.0]]).unwrap();
        let s = synthetic_pairwise(&m, &[PairOp::Product, PairOp::Difference, PairOp::Ratio]).unwrap();
        assert_eq!(s.n_cols(), 9);
    }
}
