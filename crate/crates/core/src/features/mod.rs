//! Feature recipes: turn raw monthly observations into named columns.
//!
//! Everything here is row-local or cross-sectional within one period, except
//! the technical indicators, which read only target means of earlier periods.
//! PCA is fitted separately on training rows by the backtest.

mod aggregate;
mod indicators;
mod matrix;
mod pairwise;
mod pca;

pub use aggregate::{aggregate_monthly_stats, Stat, ALL_STATS};
pub use indicators::{technical_indicators, IndicatorParams, IndicatorValues, INDICATOR_NAMES};
pub use matrix::{FeatureMatrix, RowId};
pub use pairwise::{synthetic_pairwise, PairOp, RATIO_EPSILON};
pub use pca::{orient, pca_fit, pca_transform, PcaModel};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::LinalgError;
use crate::panel::{parse_label, ColumnSchema, Period, PeriodId};
use crate::ranks::percentiles;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatureError {
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("column `{0}` contains a non-finite value")]
    NonFinite(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("column mismatch: {0}")]
    ColumnMismatch(String),
    #[error("malformed period label `{0}`")]
    MalformedLabel(String),
    #[error("indicator series is empty")]
    EmptySeries,
    #[error("zero total variance")]
    DegenerateInput,
    #[error("need at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("invalid recipe: {0}")]
    InvalidRecipe(String),
    #[error("observation {0} has missing values; impute the panel first")]
    Unimputed(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Which feature families to emit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureRecipe {
    #[serde(default)]
    pub stats: Vec<Stat>,
    /// `X{i}_mean_pct`: within-period percentile of each variable mean.
    #[serde(default)]
    pub include_percentiles: bool,
    /// `year` and `half` of the period label.
    #[serde(default)]
    pub include_calendar: bool,
    /// Pairwise combinations of the variable means.
    #[serde(default)]
    pub pairwise: Vec<PairOp>,
    #[serde(default)]
    pub indicators: Option<IndicatorParams>,
    /// Append principal components explaining this fraction of variance.
    #[serde(default)]
    pub pca: Option<f64>,
}

impl Default for FeatureRecipe {
    fn default() -> Self {
        Self::means_only()
    }
}

impl FeatureRecipe {
    /// One mean per variable.
    pub fn means_only() -> Self {
        Self {
            stats: vec![Stat::Mean],
            include_percentiles: false,
            include_calendar: false,
            pairwise: Vec::new(),
            indicators: None,
            pca: None,
        }
    }

    /// Means, mean percentiles, year and half: `2 * n_variables + 2` columns.
    pub fn mean_percentile_calendar() -> Self {
        Self { include_percentiles: true, include_calendar: true, ..Self::means_only() }
    }

    /// All thirteen aggregation statistics.
    pub fn all_stats() -> Self {
        Self { stats: ALL_STATS.to_vec(), ..Self::means_only() }
    }

    /// Mean, standard deviation and relative spread.
    pub fn grouped_basic() -> Self {
        Self { stats: vec![Stat::Mean, Stat::Std, Stat::Cv], ..Self::means_only() }
    }

    pub fn validate(&self) -> Result<(), FeatureError> {
        let any = !self.stats.is_empty()
            || self.include_percentiles
            || self.include_calendar
            || !self.pairwise.is_empty()
            || self.indicators.is_some();
        if !any {
            return Err(FeatureError::InvalidRecipe("no feature source enabled".into()));
        }
        if let Some(p) = &self.indicators {
            p.validate()?;
        }
        if let Some(t) = self.pca {
            if !(t > 0.0 && t <= 1.0) {
                return Err(FeatureError::InvalidRecipe(format!("pca threshold {t} outside (0, 1]")));
            }
        }
        let mut seen = std::collections::HashSet::new();
        if !self.stats.iter().all(|s| seen.insert(*s)) {
            return Err(FeatureError::InvalidRecipe("repeated stat".into()));
        }
        Ok(())
    }

    /// Column count produced by [`build_period_features`], PCA excluded.
    pub fn static_column_count(&self, n_variables: usize) -> usize {
        let pairs = n_variables * n_variables.saturating_sub(1) / 2;
        n_variables * self.stats.len()
            + if self.include_percentiles { n_variables } else { 0 }
            + if self.include_calendar { 2 } else { 0 }
            + pairs * self.pairwise.len()
            + if self.indicators.is_some() { INDICATOR_NAMES.len() } else { 0 }
    }
}

/// Within-period percentile of each value, `(avg_rank - 1) / (n - 1)`.
pub fn percentile_within_period(values: &[f64]) -> Vec<f64> {
    if values.is_empty() {
        return Vec::new();
    }
    percentiles(values)
}

/// `(year, half)` of a `YYYY_H` label.
pub fn calendar_features(period: &PeriodId) -> Result<(f64, f64), FeatureError> {
    parse_label(&period.label)
        .map(|(y, h)| (f64::from(y), f64::from(h)))
        .ok_or_else(|| FeatureError::MalformedLabel(period.label.clone()))
}

/// Mean training-row target of a period, if any training target exists.
pub fn period_train_target_mean(period: &Period) -> Option<f64> {
    let ys: Vec<f64> = period.train_rows().filter_map(|o| o.target).collect();
    if ys.is_empty() {
        None
    } else {
        Some(ys.iter().sum::<f64>() / ys.len() as f64)
    }
}

/// Builds every static feature for all rows of `period`.
///
/// `past_target_means` is the chronological series of training-target means
/// of earlier periods; it feeds the indicators, which are 0 when it is empty.
pub fn build_period_features(
    period: &Period,
    schema: &ColumnSchema,
    recipe: &FeatureRecipe,
    past_target_means: &[f64],
) -> Result<FeatureMatrix, FeatureError> {
    recipe.validate()?;
    let rows = &period.observations;
    if let Some(o) = rows.iter().find(|o| o.monthly.iter().any(Option::is_none)) {
        return Err(FeatureError::Unimputed(o.obs_id.clone()));
    }
    let row_ids = rows
        .iter()
        .map(|o| RowId { ordinal: period.id.ordinal, obs_id: o.obs_id.clone() })
        .collect();
    let mut out = FeatureMatrix::empty(row_ids);
    let nv = schema.n_variables;
    let series: Vec<Vec<Vec<f64>>> = rows.iter().map(|o| (0..nv).map(|v| o.series(schema, v)).collect()).collect();

    for v in 0..nv {
        for s in &recipe.stats {
            let col = series.iter().map(|r| s.compute(&r[v])).collect();
            out.push_column(s.column_name(v), col)?;
        }
    }

    let need_means = recipe.include_percentiles || !recipe.pairwise.is_empty();
    let means: Vec<Vec<f64>> = if need_means {
        (0..nv).map(|v| series.iter().map(|r| Stat::Mean.compute(&r[v])).collect()).collect()
    } else {
        Vec::new()
    };

    if recipe.include_percentiles {
        for (v, m) in means.iter().enumerate() {
            out.push_column(format!("X{}_mean_pct", v + 1), percentile_within_period(m))?;
        }
    }

    if recipe.include_calendar {
        let (year, half) = calendar_features(&period.id)?;
        out.push_column("year", vec![year; rows.len()])?;
        out.push_column("half", vec![half; rows.len()])?;
    }

    if !recipe.pairwise.is_empty() {
        let names = (0..nv).map(|v| Stat::Mean.column_name(v)).collect();
        let mean_matrix = FeatureMatrix::new(names, means, out.row_ids().to_vec())?;
        out.append(synthetic_pairwise(&mean_matrix, &recipe.pairwise)?)?;
    }

    if let Some(params) = &recipe.indicators {
        let values = if past_target_means.is_empty() {
            [0.0; 4]
        } else {
            technical_indicators(past_target_means, params)?.as_array()
        };
        for (name, v) in INDICATOR_NAMES.iter().zip(values) {
            out.push_column(*name, vec![v; rows.len()])?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::StockObservation;

    fn period(values: &[[f64; 4]]) -> Period {
        Period {
            id: PeriodId { ordinal: 3, label: "2002_1".into() },
            observations: values
                .iter()
                .enumerate()
                .map(|(i, v)| StockObservation {
                    obs_id: format!("s{i}"),
                    monthly: v.iter().map(|x| Some(*x)).collect(),
                    is_train: i % 2 == 0,
                    target: Some(i as f64),
                })
                .collect(),
        }
    }

    const SCHEMA: ColumnSchema = ColumnSchema { n_variables: 2, n_months: 2 };

    #[test]
    fn percentile_examples() {
        assert_eq!(percentile_within_period(&[10.0, 20.0, 30.0]), vec![0.0, 0.5, 1.0]);
        assert_eq!(percentile_within_period(&[7.0, 7.0]), vec![0.5, 0.5]);
        assert_eq!(percentile_within_period(&[42.0]), vec![0.5]);
    }

    #[test]
    fn calendar_examples() {
        let id = |l: &str| PeriodId { ordinal: 1, label: l.into() };
        assert_eq!(calendar_features(&id("2002_1")).unwrap(), (2002.0, 1.0));
        assert_eq!(calendar_features(&id("1996_2")).unwrap(), (1996.0, 2.0));
        assert_eq!(calendar_features(&id("2017_2")).unwrap(), (2017.0, 2.0));
        assert!(matches!(calendar_features(&id("2017-2")), Err(FeatureError::MalformedLabel(_))));
    }

    #[test]
    fn mean_percentile_calendar_recipe() {
        let p = period(&[[1.0, 3.0, 0.0, 0.0], [5.0, 7.0, 1.0, 1.0], [2.0, 2.0, 4.0, 4.0]]);
        let m = build_period_features(&p, &SCHEMA, &FeatureRecipe::mean_percentile_calendar(), &[]).unwrap();
        assert_eq!(m.names(), &["X1_mean", "X2_mean", "X1_mean_pct", "X2_mean_pct", "year", "half"]);
        assert_eq!(m.column("X1_mean").unwrap(), &[2.0, 6.0, 2.0]);
        assert_eq!(m.column("X1_mean_pct").unwrap(), &[0.25, 1.0, 0.25]);
        assert_eq!(m.column("year").unwrap(), &[2002.0; 3]);
        assert_eq!(m.n_cols(), FeatureRecipe::mean_percentile_calendar().static_column_count(2));
        assert_eq!(m.row_ids()[1], RowId { ordinal: 3, obs_id: "s1".into() });
    }

    #[test]
    fn indicators_are_broadcast() {
        let p = period(&[[1.0, 3.0, 0.0, 0.0], [5.0, 7.0, 1.0, 1.0]]);
        let recipe = FeatureRecipe { indicators: Some(IndicatorParams::default()), ..FeatureRecipe::means_only() };
        let m = build_period_features(&p, &SCHEMA, &recipe, &[1.0, 2.0]).unwrap();
        assert_eq!(m.column("ind_momentum").unwrap(), &[1.0, 1.0]);
        let cold = build_period_features(&p, &SCHEMA, &recipe, &[]).unwrap();
        assert_eq!(cold.column("ind_ma").unwrap(), &[0.0, 0.0]);
    }

    #[test]
    fn closed_form_counts() {
        assert_eq!(FeatureRecipe::all_stats().static_column_count(70), 910);
        assert_eq!(FeatureRecipe::mean_percentile_calendar().static_column_count(70), 142);
        let syn = FeatureRecipe { pairwise: vec![PairOp::Product, PairOp::Ratio], ..FeatureRecipe::means_only() };
        assert_eq!(syn.static_column_count(4), 4 + 6 * 2);
        let p = period(&[[1.0, 3.0, 0.0, 2.0], [5.0, 7.0, 1.0, 1.0]]);
        let full = FeatureRecipe {
            stats: ALL_STATS.to_vec(),
            include_percentiles: true,
            include_calendar: true,
            pairwise: vec![PairOp::Product, PairOp::Difference, PairOp::Ratio],
            indicators: Some(IndicatorParams::default()),
            pca: None,
        };
        let m = build_period_features(&p, &SCHEMA, &full, &[0.3]).unwrap();
        assert_eq!(m.n_cols(), full.static_column_count(2));
    }

    #[test]
    fn recipe_validation() {
        let empty = FeatureRecipe { stats: vec![], ..FeatureRecipe::means_only() };
        assert!(empty.validate().is_err());
        let bad_pca = FeatureRecipe { pca: Some(1.5), ..FeatureRecipe::means_only() };
        assert!(bad_pca.validate().is_err());
    }

    #[test]
    fn unimputed_rows_are_rejected() {
        let mut p = period(&[[1.0, 3.0, 0.0, 0.0]]);
        p.observations[0].monthly[1] = None;
        assert!(matches!(
            build_period_features(&p, &SCHEMA, &FeatureRecipe::means_only(), &[]),
            Err(FeatureError::Unimputed(_))
        ));
    }
}
