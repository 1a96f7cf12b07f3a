//! Average-rank kernel shared by the target transform, percentile features
//! and the rank metrics.

use std::cmp::Ordering;

/// 1-based average ranks, ascending. Tied values share the mean of the ranks
/// they span. NaN inputs are ordered last via `total_cmp`.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| cmp_f64(values[a], values[b]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && values[idx[j]] == values[idx[i]] {
            j += 1;
        }
        // positions i..j (0-based) hold ranks i+1..=j
        let avg = (i + 1 + j) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = avg;
        }
        i = j;
    }
    ranks
}

/// Percentile of each value inside its vector: `(rank - 1) / (n - 1)` with
/// average ranks. A single value maps to 0.5.
pub fn percentiles(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n == 1 {
        return vec![0.5];
    }
    let denom = (n - 1) as f64;
    average_ranks(values)
        .into_iter()
        .map(|r| (r - 1.0) / denom)
        .collect()
}

pub(crate) fn cmp_f64(a: f64, b: f64) -> Ordering {
    a.total_cmp(&b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_get_average_rank() {
        assert_eq!(average_ranks(&[10.0, 30.0, 20.0]), vec![1.0, 3.0, 2.0]);
        assert_eq!(average_ranks(&[5.0, 5.0]), vec![1.5, 1.5]);
        assert_eq!(average_ranks(&[1.0, 2.0, 2.0, 0.0]), vec![2.0, 3.5, 3.5, 1.0]);
    }

    #[test]
    fn percentile_examples() {
        assert_eq!(percentiles(&[10.0, 20.0, 30.0]), vec![0.0, 0.5, 1.0]);
        assert_eq!(percentiles(&[7.0, 7.0]), vec![0.5, 0.5]);
        assert_eq!(percentiles(&[42.0]), vec![0.5]);
    }

    #[test]
    fn negative_zero_ties_with_zero() {
        assert_eq!(average_ranks(&[0.0, -0.0]), vec![1.5, 1.5]);
    }
}
