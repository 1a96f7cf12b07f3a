use serde::{Deserialize, Serialize};

use super::BacktestError;
use crate::features::FeatureRecipe;
use crate::metrics::MetricKind;
use crate::models::ModelSpec;
use crate::panel::{Imputation, Window};
use crate::selection::SubsetOptions;
use crate::target::TargetMode;

/// Ordinal of the first evaluated period when ordinal 1 is `1996_2`
/// (that is, `2002_1`).
pub const DEFAULT_FIRST_EVAL_ORDINAL: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WindowMode {
    /// Every period before the target.
    #[default]
    Expanding,
    /// The `k` most recent periods before the target.
    Sliding { k: usize },
}

impl WindowMode {
    pub fn as_window(&self) -> Window {
        match *self {
            WindowMode::Expanding => Window::All,
            WindowMode::Sliding { k } => Window::Last(k),
        }
    }
}

/// What to do for a target period whose rows carry no training targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FinalPeriodRule {
    /// Refit the previous period's winning model and features on the full
    /// history window.
    #[default]
    ReuseLast,
    /// Use the grid model with the best mean validation score over all
    /// earlier periods; features come from the configured stages, validated
    /// on the most recent labelled period.
    GenericAverage,
}

/// One feature or period selection step, applied in configured order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case", deny_unknown_fields)]
pub enum Stage {
    PeriodSubset,
    SignStability {
        #[serde(default = "default_max_flips")]
        max_flips: usize,
    },
    SingleFeatureScreen,
    RedundancyPrune {
        #[serde(default = "default_redundancy")]
        threshold: f64,
    },
    CorrelationOrder,
    Stepwise,
    TopK { k: usize },
}

fn default_max_flips() -> usize {
    crate::selection::DEFAULT_MAX_FLIPS
}

fn default_redundancy() -> f64 {
    0.8
}

fn default_first_eval() -> usize {
    DEFAULT_FIRST_EVAL_ORDINAL
}

impl Stage {
    pub fn name(&self) -> String {
        match self {
            Stage::PeriodSubset => "period_subset".into(),
            Stage::SignStability { max_flips } => format!("sign_stability(max_flips={max_flips})"),
            Stage::SingleFeatureScreen => "single_feature_screen".into(),
            Stage::RedundancyPrune { threshold } => format!("redundancy_prune(threshold={threshold})"),
            Stage::CorrelationOrder => "correlation_order".into(),
            Stage::Stepwise => "stepwise".into(),
            Stage::TopK { k } => format!("top_k(k={k})"),
        }
    }
}

/// Full configuration of one backtest run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineSpec {
    #[serde(default = "default_imputation")]
    pub imputation: Imputation,
    #[serde(default)]
    pub recipe: FeatureRecipe,
    #[serde(default)]
    pub target: TargetMode,
    #[serde(default)]
    pub stages: Vec<Stage>,
    pub model_grid: Vec<ModelSpec>,
    /// Model used inside selection stages; the first grid entry if absent.
    #[serde(default)]
    pub selection_model: Option<ModelSpec>,
    #[serde(default)]
    pub window: WindowMode,
    #[serde(default = "default_first_eval")]
    pub first_eval_ordinal: usize,
    #[serde(default)]
    pub final_period_rule: FinalPeriodRule,
    #[serde(default)]
    pub selection_metric: MetricKind,
    #[serde(default)]
    pub subset: SubsetOptions,
}

fn default_imputation() -> Imputation {
    Imputation::Zero
}

impl PipelineSpec {
    /// Means-only features, no selection stages, one model.
    pub fn simple(model: ModelSpec, first_eval_ordinal: usize) -> Self {
        Self {
            imputation: Imputation::Zero,
            recipe: FeatureRecipe::means_only(),
            target: TargetMode::Raw,
            stages: Vec::new(),
            model_grid: vec![model],
            selection_model: None,
            window: WindowMode::Expanding,
            first_eval_ordinal,
            final_period_rule: FinalPeriodRule::ReuseLast,
            selection_metric: MetricKind::Combined,
            subset: SubsetOptions::default(),
        }
    }

    pub fn selection_model(&self) -> ModelSpec {
        self.selection_model.unwrap_or(self.model_grid[0])
    }

    pub fn validate(&self) -> Result<(), BacktestError> {
        let bad = |m: String| Err(BacktestError::InvalidSpec(m));
        if self.first_eval_ordinal < 2 {
            return bad(format!("first_eval_ordinal must be >= 2, got {}", self.first_eval_ordinal));
        }
        if self.model_grid.is_empty() {
            return bad("model_grid is empty".into());
        }
        for m in self.model_grid.iter().chain(self.selection_model.iter()) {
            m.validate().map_err(|e| BacktestError::InvalidSpec(e.to_string()))?;
        }
        self.recipe.validate().map_err(|e| BacktestError::InvalidSpec(e.to_string()))?;
        if let TargetMode::ChronoRank { power } = self.target {
            if !power.is_finite() || power < 0.0 {
                return bad(format!("target power must be finite and >= 0, got {power}"));
            }
        }
        if let WindowMode::Sliding { k: 0 } = self.window {
            return bad("sliding window needs k >= 1".into());
        }
        if let MetricKind::NdcgTopFraction { fraction } = self.selection_metric {
            if !(fraction > 0.0 && fraction <= 1.0) {
                return bad(format!("ndcg fraction {fraction} outside (0, 1]"));
            }
        }
        if self.subset.max_sweeps == 0 || !(self.subset.tie_epsilon >= 0.0) {
            return bad("subset options need max_sweeps >= 1 and tie_epsilon >= 0".into());
        }
        for s in &self.stages {
            match *s {
                Stage::TopK { k: 0 } => return bad("top_k needs k >= 1".into()),
                Stage::RedundancyPrune { threshold } if !(threshold > 0.0 && threshold <= 1.0) => {
                    return bad(format!("redundancy threshold {threshold} outside (0, 1]"))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_from_minimal_json() {
        let spec: PipelineSpec =
            serde_json::from_str(r#"{"model_grid":[{"kind":{"type":"ridge","alpha":850.0}}]}"#).unwrap();
        assert_eq!(spec.first_eval_ordinal, DEFAULT_FIRST_EVAL_ORDINAL);
        assert_eq!(spec.window, WindowMode::Expanding);
        assert_eq!(spec.final_period_rule, FinalPeriodRule::ReuseLast);
        assert_eq!(spec.selection_model(), ModelSpec::ridge(850.0, true));
        spec.validate().unwrap();
    }

    #[test]
    fn stages_parse_and_round_trip() {
        let json = r#"[{"stage":"period_subset"},{"stage":"sign_stability"},{"stage":"redundancy_prune"},{"stage":"top_k","k":26}]"#;
        let stages: Vec<Stage> = serde_json::from_str(json).unwrap();
        assert_eq!(stages[1], Stage::SignStability { max_flips: 10 });
        assert_eq!(stages[2], Stage::RedundancyPrune { threshold: 0.8 });
        let back: Vec<Stage> = serde_json::from_str(&serde_json::to_string(&stages).unwrap()).unwrap();
        assert_eq!(back, stages);
    }

    #[test]
    fn invalid_specs() {
        let mut s = PipelineSpec::simple(ModelSpec::ridge(1.0, true), 1);
        assert!(s.validate().is_err());
        s.first_eval_ordinal = 2;
        s.validate().unwrap();
        s.model_grid.clear();
        assert!(s.validate().is_err());
        let mut s = PipelineSpec::simple(ModelSpec::ridge(1.0, true), 3);
        s.window = WindowMode::Sliding { k: 0 };
        assert!(s.validate().is_err());
        let mut s = PipelineSpec::simple(ModelSpec::ridge(1.0, true), 3);
        s.stages.push(Stage::TopK { k: 0 });
        assert!(s.validate().is_err());
        assert!(serde_json::from_str::<PipelineSpec>(r#"{"model_grid":[],"bogus":1}"#).is_err());
    }
}
