//! Data, feature and model selection procedures.
//!
//! Everything operates on [`LabelledBlock`]s: one period's labelled rows with
//! their feature matrix and raw targets. A [`Learner`] couples a model spec
//! with the training-target transform so that every procedure fits models
//! exactly the way the backtest does.

mod features;
mod grid;
mod periods;
mod redundancy;
mod sign;

pub use features::{order_features_by_correlation, single_feature_screen, split_fit_feedback, stepwise_forward_select};
pub use grid::{grid_search_best, GridEntry, GridResult};
pub use periods::{select_training_periods, SubsetOptions};
pub use redundancy::{period_mean_matrix, redundancy_prune};
pub use sign::{sign_stability_filter, SignStabilityStat, StabilityWindow, DEFAULT_MAX_FLIPS};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureError, FeatureMatrix};
use crate::metrics::{MetricError, MetricKind};
use crate::models::{fit, ModelError, ModelSpec, TrainedLinearModel};
use crate::target::{TargetError, TargetMode};

/// Margin a score must clear to count as an improvement.
pub const TIE_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SelectionError {
    #[error("validation targets are constant or too few")]
    DegenerateValidation,
    #[error("no stability window fits the available history")]
    NoUsableWindow,
    #[error("every candidate failed: {0}")]
    AllCandidatesFailed(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Target(#[from] TargetError),
}

/// One period's labelled rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelledBlock {
    pub ordinal: usize,
    pub x: FeatureMatrix,
    pub y: Vec<f64>,
}

impl LabelledBlock {
    pub fn new(ordinal: usize, x: FeatureMatrix, y: Vec<f64>) -> Result<Self, SelectionError> {
        if x.n_rows() != y.len() {
            return Err(FeatureError::LengthMismatch { expected: x.n_rows(), got: y.len() }.into());
        }
        Ok(Self { ordinal, x, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn select_rows(&self, rows: &[usize]) -> LabelledBlock {
        LabelledBlock {
            ordinal: self.ordinal,
            x: self.x.select_rows(rows),
            y: rows.iter().map(|&r| self.y[r]).collect(),
        }
    }

    /// Targets have at least two distinct values.
    pub fn is_informative(&self) -> bool {
        self.y.len() >= 2 && self.y.iter().any(|v| *v != self.y[0])
    }
}

pub(crate) fn ensure_validation(validation: &[LabelledBlock]) -> Result<(), SelectionError> {
    if validation.iter().any(LabelledBlock::is_informative) {
        Ok(())
    } else {
        Err(SelectionError::DegenerateValidation)
    }
}

/// Model spec plus target transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Learner {
    pub spec: ModelSpec,
    #[serde(default)]
    pub target: TargetMode,
}

impl Learner {
    pub fn new(spec: ModelSpec, target: TargetMode) -> Self {
        Self { spec, target }
    }

    /// Fits on the stacked rows of `blocks` restricted to `features`.
    pub fn fit<B: AsRef<LabelledBlock>>(&self, blocks: &[B], features: &[String]) -> Result<TrainedLinearModel, SelectionError> {
        if blocks.is_empty() {
            return Err(SelectionError::EmptyInput("no training blocks".into()));
        }
        if features.is_empty() {
            return Err(SelectionError::EmptyInput("no features".into()));
        }
        let parts = blocks
            .iter()
            .map(|b| b.as_ref().x.select_columns(features))
            .collect::<Result<Vec<_>, _>>()?;
        let refs: Vec<&FeatureMatrix> = parts.iter().collect();
        let x = FeatureMatrix::vstack(&refs)?;
        let pairs: Vec<(usize, f64)> = blocks
            .iter()
            .flat_map(|b| {
                let b = b.as_ref();
                b.y.iter().map(move |y| (b.ordinal, *y))
            })
            .collect();
        let y = self.target.apply(&pairs)?;
        Ok(fit(&x, &y, &self.spec)?)
    }

    pub fn fit_and_score<B: AsRef<LabelledBlock>>(
        &self,
        blocks: &[B],
        features: &[String],
        validation: &[LabelledBlock],
        metric: MetricKind,
    ) -> Result<f64, SelectionError> {
        let model = self.fit(blocks, features)?;
        score_model(&model, validation, metric)
    }
}

impl AsRef<LabelledBlock> for LabelledBlock {
    fn as_ref(&self) -> &LabelledBlock {
        self
    }
}

/// Mean per-block metric of `model` over the informative validation blocks.
pub fn score_model(model: &TrainedLinearModel, validation: &[LabelledBlock], metric: MetricKind) -> Result<f64, SelectionError> {
    let mut total = 0.0;
    let mut count = 0usize;
    for block in validation.iter().filter(|b| b.is_informative()) {
        let x = block.x.select_columns(&model.feature_names)?;
        let pred = model.predict(&x)?;
        total += metric.evaluate(&pred, &block.y)?;
        count += 1;
    }
    if count == 0 {
        return Err(SelectionError::DegenerateValidation);
    }
    Ok(total / count as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dropped<K> {
    pub item: K,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: usize,
    pub score: f64,
}

/// Result of a selection procedure over items of type `K` (period ordinals
/// or feature names).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionOutcome<K> {
    pub kept: Vec<K>,
    pub dropped: Vec<Dropped<K>>,
    pub score_trace: Vec<TraceStep>,
    /// Model fits a serial run needs to reach this outcome.
    #[serde(default)]
    pub model_fits: usize,
}

impl<K> SelectionOutcome<K> {
    pub(crate) fn new() -> Self {
        Self { kept: Vec::new(), dropped: Vec::new(), score_trace: Vec::new(), model_fits: 0 }
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Small deterministic pseudo-random stream for fixtures.
    pub struct Lcg(pub u64);

    impl Lcg {
        pub fn next_f64(&mut self) -> f64 {
            self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((self.0 >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        }
    }

    pub fn block(ordinal: usize, names: &[&str], rows: &[Vec<f64>], y: Vec<f64>) -> LabelledBlock {
        LabelledBlock::new(ordinal, FeatureMatrix::from_rows(names, rows).unwrap(), y).unwrap()
    }

    pub fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }
}
