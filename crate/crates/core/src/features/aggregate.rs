use serde::{Deserialize, Serialize};

/// Per-variable summary of the monthly values within one period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stat {
    Mean,
    Median,
    Std,
    Max,
    Min,
    Change,
    ChangeSecondLastToLast,
    Range,
    MeanDiff,
    MedianDiff,
    StdDiff,
    MaxDiff,
    MinDiff,
    /// std / |mean|, the relative spread.
    Cv,
}

/// The thirteen aggregation statistics.
pub const ALL_STATS: [Stat; 13] = [
    Stat::Mean,
    Stat::Median,
    Stat::Std,
    Stat::Max,
    Stat::Min,
    Stat::Change,
    Stat::ChangeSecondLastToLast,
    Stat::Range,
    Stat::MeanDiff,
    Stat::MedianDiff,
    Stat::StdDiff,
    Stat::MaxDiff,
    Stat::MinDiff,
];

const CV_EPSILON: f64 = 1e-8;

impl Stat {
    pub fn name(&self) -> &'static str {
        match self {
            Stat::Mean => "mean",
            Stat::Median => "median",
            Stat::Std => "std",
            Stat::Max => "max",
            Stat::Min => "min",
            Stat::Change => "change",
            Stat::ChangeSecondLastToLast => "change_second_last_to_last",
            Stat::Range => "range",
            Stat::MeanDiff => "mean_diff",
            Stat::MedianDiff => "median_diff",
            Stat::StdDiff => "std_diff",
            Stat::MaxDiff => "max_diff",
            Stat::MinDiff => "min_diff",
            Stat::Cv => "cv",
        }
    }

    pub fn column_name(&self, var: usize) -> String {
        format!("X{}_{}", var + 1, self.name())
    }

    pub fn compute(&self, v: &[f64]) -> f64 {
        match self {
            Stat::Mean => mean(v),
            Stat::Median => median(v),
            Stat::Std => sample_std(v),
            Stat::Max => v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Stat::Min => v.iter().copied().fold(f64::INFINITY, f64::min),
            Stat::Change => v[v.len() - 1] - v[0],
            Stat::ChangeSecondLastToLast => {
                if v.len() < 2 {
                    0.0
                } else {
                    v[v.len() - 1] - v[v.len() - 2]
                }
            }
            Stat::Range => Stat::Max.compute(v) - Stat::Min.compute(v),
            Stat::MeanDiff => on_diffs(v, mean),
            Stat::MedianDiff => on_diffs(v, median),
            Stat::StdDiff => on_diffs(v, sample_std),
            Stat::MaxDiff => on_diffs(v, |d| Stat::Max.compute(d)),
            Stat::MinDiff => on_diffs(v, |d| Stat::Min.compute(d)),
            Stat::Cv => sample_std(v) / mean(v).abs().max(CV_EPSILON),
        }
    }
}

/// Every requested statistic of one variable's monthly values, in `stats`
/// order.
pub fn aggregate_monthly_stats(values: &[f64], stats: &[Stat]) -> Vec<f64> {
    stats.iter().map(|s| s.compute(values)).collect()
}

fn on_diffs(v: &[f64], f: impl Fn(&[f64]) -> f64) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let d: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
    f(&d)
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn median(v: &[f64]) -> f64 {
    crate::panel::median(v.to_vec()).unwrap_or(0.0)
}

/// Sample standard deviation (divisor n - 1); 0 for a single value.
pub(crate) fn sample_std(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}
