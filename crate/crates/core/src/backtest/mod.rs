//! Walk-forward backtest.
//!
//! For each target period `T` the engine sees only the train rows of earlier
//! periods (per the window), the feature values of period `T` itself, and the
//! train-flagged rows of `T` as validation feedback. Test rows of `T` are
//! predicted and scored; their targets never reach a fit or a selection step.
//! Labelled periods are independent and run concurrently; periods without
//! training targets are resolved afterwards by the final-period rule.

mod report;
mod spec;

pub use report::{
    emit_report, Aggregates, BacktestReport, MetricSummary, PeriodPredictions, PeriodRecord, PeriodStatus, ReportFormat,
    ReportProvenance, StageRecord,
};
pub use spec::{FinalPeriodRule, PipelineSpec, Stage, WindowMode, DEFAULT_FIRST_EVAL_ORDINAL};

use std::borrow::Cow;

use thiserror::Error;

use crate::features::{build_period_features, pca_fit, pca_transform, period_train_target_mean, FeatureError, FeatureMatrix, PcaModel};
use crate::metrics::{ndcg_top_fraction, spearman, DEFAULT_NDCG_FRACTION};
use crate::models::{ModelSpec, TrainedLinearModel};
use crate::panel::{Panel, PanelError};
use crate::par;
use crate::selection::{
    grid_search_best, order_features_by_correlation, period_mean_matrix, redundancy_prune,
    select_training_periods, sign_stability_filter, single_feature_screen, split_fit_feedback, stepwise_forward_select,
    LabelledBlock, Learner, SelectionError, SelectionOutcome, StabilityWindow, TIE_EPSILON,
};

#[derive(Debug, Error)]
pub enum BacktestError {
    #[error("invalid pipeline spec: {0}")]
    InvalidSpec(String),
    #[error("panel has {periods} periods but evaluation starts at ordinal {first_eval}")]
    InsufficientHistory { periods: usize, first_eval: usize },
    #[error(transparent)]
    Panel(#[from] PanelError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestOutput {
    pub report: BacktestReport,
    pub predictions: Vec<PeriodPredictions>,
}

/// Per-period failure; recorded in the report instead of aborting the run.
#[derive(Debug, Error)]
enum PeriodError {
    #[error("insufficient history: {0}")]
    InsufficientHistory(String),
    #[error("stage {0} kept no features")]
    EmptyStage(String),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("scoring failed: {0}")]
    Score(String),
}

impl From<crate::models::ModelError> for PeriodError {
    fn from(e: crate::models::ModelError) -> Self {
        PeriodError::Selection(e.into())
    }
}

/// Static features and row bookkeeping of one period.
struct PeriodData {
    ordinal: usize,
    label: String,
    features: FeatureMatrix,
    labelled: Vec<usize>,
    test: Vec<usize>,
    targets: Vec<Option<f64>>,
}

impl PeriodData {
    fn labelled_block(&self) -> Option<LabelledBlock> {
        if self.labelled.is_empty() {
            return None;
        }
        let y = self.labelled.iter().map(|&r| self.targets[r].expect("labelled row")).collect();
        Some(LabelledBlock { ordinal: self.ordinal, x: self.features.select_rows(&self.labelled), y })
    }
}

/// How a period's configuration is chosen.
enum Mode<'a> {
    /// Validation on the period's own train rows.
    Labelled,
    /// Stages validated on the latest labelled period, model by mean grid score.
    GenericAverage { prior: &'a [PeriodRecord] },
    /// Previous winner refitted.
    ReuseLast { previous: &'a PeriodRecord },
}

struct Outcome {
    record: PeriodRecord,
    predictions: Option<PeriodPredictions>,
}

pub fn run_backtest(panel: &Panel, spec: &PipelineSpec) -> Result<BacktestOutput, BacktestError> {
    spec.validate()?;
    let panel: Cow<'_, Panel> = if panel.provenance().imputation.is_none() {
        Cow::Owned(panel.impute(spec.imputation)?)
    } else {
        Cow::Borrowed(panel)
    };
    let n_periods = panel.len();
    if n_periods < spec.first_eval_ordinal {
        return Err(BacktestError::InsufficientHistory { periods: n_periods, first_eval: spec.first_eval_ordinal });
    }
    let data = build_all(&panel, spec)?;

    let targets: Vec<usize> = (spec.first_eval_ordinal..=n_periods).collect();
    let (labelled, unlabelled): (Vec<usize>, Vec<usize>) =
        targets.iter().partition(|&&t| data[t - 1].labelled_block().is_some_and(|b| b.is_informative()));

    let mut outcomes: Vec<Outcome> = par::map(&labelled, |&t| evaluate(&data, spec, t, Mode::Labelled));
    for t in unlabelled {
        let mut prior: Vec<PeriodRecord> = outcomes.iter().map(|o| o.record.clone()).filter(|r| r.ordinal < t).collect();
        prior.sort_by_key(|r| r.ordinal);
        let outcome = match spec.final_period_rule {
            FinalPeriodRule::GenericAverage => evaluate(&data, spec, t, Mode::GenericAverage { prior: &prior }),
            FinalPeriodRule::ReuseLast => match prior.iter().rev().find(|r| r.status != PeriodStatus::Failed) {
                Some(previous) => evaluate(&data, spec, t, Mode::ReuseLast { previous }),
                None => failed(&data[t - 1], PeriodError::InsufficientHistory("no earlier successful period to reuse".into())),
            },
        };
        outcomes.push(outcome);
    }
    outcomes.sort_by_key(|o| o.record.ordinal);

    let mut records = Vec::with_capacity(outcomes.len());
    let mut predictions = Vec::new();
    for o in outcomes {
        records.push(o.record);
        predictions.extend(o.predictions);
    }
    let report = BacktestReport {
        aggregates: Aggregates::from_records(&records),
        records,
        provenance: ReportProvenance {
            spec: spec.clone(),
            data_checksum: panel.checksum(),
            n_periods,
            n_rows: panel.n_rows(),
        },
    };
    Ok(BacktestOutput { report, predictions })
}

fn build_all(panel: &Panel, spec: &PipelineSpec) -> Result<Vec<PeriodData>, BacktestError> {
    let mut past: Vec<Vec<f64>> = Vec::with_capacity(panel.len());
    let mut running = Vec::new();
    for p in panel.periods() {
        past.push(running.clone());
        running.extend(period_train_target_mean(p));
    }
    let schema = panel.schema();
    let built = par::map_range(panel.len(), |i| {
        let p = &panel.periods()[i];
        let features = build_period_features(p, schema, &spec.recipe, &past[i])?;
        let obs = &p.observations;
        Ok(PeriodData {
            ordinal: p.id.ordinal,
            label: p.id.label.clone(),
            features,
            labelled: (0..obs.len()).filter(|&r| obs[r].is_train && obs[r].target.is_some()).collect(),
            test: (0..obs.len()).filter(|&r| !obs[r].is_train).collect(),
            targets: obs.iter().map(|o| o.target).collect(),
        })
    });
    built.into_iter().collect()
}

fn failed(period: &PeriodData, e: PeriodError) -> Outcome {
    Outcome { record: PeriodRecord::failed(period.label.clone(), period.ordinal, e.to_string()), predictions: None }
}

fn evaluate(data: &[PeriodData], spec: &PipelineSpec, t: usize, mode: Mode<'_>) -> Outcome {
    let period = &data[t - 1];
    match evaluate_inner(data, spec, period, &mode) {
        Ok(o) => o,
        Err(e) => failed(period, e),
    }
}

fn history_ordinals(spec: &PipelineSpec, t: usize) -> std::ops::Range<usize> {
    let end = t - 1;
    let start = match spec.window {
        WindowMode::Expanding => 1,
        WindowMode::Sliding { k } => end.saturating_sub(k) + 1,
    };
    start..end + 1
}

fn with_pca(model: Option<&PcaModel>, x: &FeatureMatrix) -> Result<FeatureMatrix, FeatureError> {
    let mut out = x.clone();
    if let Some(m) = model {
        out.append(pca_transform(m, x)?)?;
    }
    Ok(out)
}

fn evaluate_inner(data: &[PeriodData], spec: &PipelineSpec, period: &PeriodData, mode: &Mode<'_>) -> Result<Outcome, PeriodError> {
    let t = period.ordinal;
    let mut history: Vec<LabelledBlock> =
        history_ordinals(spec, t).filter_map(|o| data[o - 1].labelled_block()).collect();
    if history.is_empty() {
        return Err(PeriodError::InsufficientHistory(format!("no labelled periods before {}", period.label)));
    }

    let pca = match spec.recipe.pca {
        Some(threshold) => {
            let parts: Vec<&FeatureMatrix> = history.iter().map(|b| &b.x).collect();
            Some(pca_fit(&FeatureMatrix::vstack(&parts)?, threshold)?)
        }
        None => None,
    };
    if pca.is_some() {
        for b in &mut history {
            b.x = with_pca(pca.as_ref(), &b.x)?;
        }
    }
    let current = with_pca(pca.as_ref(), &period.features)?;
    let candidates: Vec<String> = current.names().to_vec();
    let learner = Learner::new(spec.selection_model(), spec.target);

    let mut stage_records = Vec::new();
    let (features, kept_periods, model_spec, grid, validation_score) = match mode {
        Mode::ReuseLast { previous } => {
            let spec_prev = previous.model.expect("successful record has a model");
            (previous.features.clone(), history.iter().map(|b| b.ordinal).collect::<Vec<_>>(), spec_prev, Vec::new(), None)
        }
        Mode::Labelled | Mode::GenericAverage { .. } => {
            let (sel_history, validation) = match mode {
                Mode::Labelled => {
                    let own = LabelledBlock { x: current.select_rows(&period.labelled), ..period.labelled_block().expect("labelled") };
                    (history.clone(), own)
                }
                _ => {
                    let mut h = history.clone();
                    let last = h.pop().expect("non-empty");
                    if h.is_empty() {
                        return Err(PeriodError::InsufficientHistory("generic validation needs two labelled periods".into()));
                    }
                    (h, last)
                }
            };
            let (features, kept) = run_stages(spec, &learner, &sel_history, &validation, candidates, &mut stage_records)?;
            let fit_blocks: Vec<&LabelledBlock> = history.iter().filter(|b| kept.contains(&b.ordinal)).collect();
            match mode {
                Mode::Labelled => {
                    let validation = std::slice::from_ref(&validation);
                    let result = grid_search_best(&spec.model_grid, ModelSpec::label, |m| {
                        Learner::new(*m, spec.target).fit_and_score(&fit_blocks, &features, validation, spec.selection_metric)
                    })?;
                    let fit_ordinals = fit_blocks.iter().map(|b| b.ordinal).collect();
                    (features, fit_ordinals, spec.model_grid[result.best], result.table, Some(result.best_score))
                }
                Mode::GenericAverage { prior } => {
                    let best = generic_best(&spec.model_grid, prior);
                    let fit_ordinals = fit_blocks.iter().map(|b| b.ordinal).collect();
                    (features, fit_ordinals, spec.model_grid[best], Vec::new(), None)
                }
                Mode::ReuseLast { .. } => unreachable!(),
            }
        }
    };

    let fit_blocks: Vec<&LabelledBlock> = history.iter().filter(|b| kept_periods.contains(&b.ordinal)).collect();
    let model: TrainedLinearModel = Learner::new(model_spec, spec.target).fit(&fit_blocks, &features)?;
    let x_test = current.select_rows(&period.test).select_columns(&features)?;
    let scores = model.predict(&x_test)?;
    let obs_ids: Vec<String> = x_test.row_ids().iter().map(|r| r.obs_id.clone()).collect();

    let truth: Vec<Option<f64>> = period.test.iter().map(|&r| period.targets[r]).collect();
    let (status, metrics) = if !truth.is_empty() && truth.iter().all(Option::is_some) {
        let y: Vec<f64> = truth.iter().map(|v| v.expect("checked")).collect();
        let s = spearman(&scores, &y).map_err(|e| PeriodError::Score(e.to_string()))?;
        let g = ndcg_top_fraction(&scores, &y, DEFAULT_NDCG_FRACTION).map_err(|e| PeriodError::Score(e.to_string()))?;
        (PeriodStatus::Scored, Some((s, g)))
    } else {
        (PeriodStatus::Unscored, None)
    };

    let record = PeriodRecord {
        period: period.label.clone(),
        ordinal: t,
        status,
        error: None,
        model: Some(model_spec),
        model_label: Some(model_spec.label()),
        features,
        periods_kept: kept_periods,
        stages: stage_records,
        validation_score,
        grid,
        n_predicted: scores.len(),
        spearman: metrics.map(|m| m.0),
        ndcg: metrics.map(|m| m.1),
        combined: metrics.map(|m| (m.0 + m.1) / 2.0),
    };
    let predictions = PeriodPredictions { period: period.label.clone(), ordinal: t, obs_ids, scores };
    Ok(Outcome { record, predictions: Some(predictions) })
}

/// Grid index with the best mean validation score over earlier periods;
/// ties go to the earlier entry, and with no scores at all the first entry.
fn generic_best(grid: &[ModelSpec], prior: &[PeriodRecord]) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for i in 0..grid.len() {
        let scores: Vec<f64> =
            prior.iter().flat_map(|r| r.grid.iter().filter(|e| e.index == i).filter_map(|e| e.score)).collect();
        if scores.is_empty() {
            continue;
        }
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        if mean > best.1 {
            best = (i, mean);
        }
    }
    best.0
}

fn record_stage<K>(records: &mut Vec<StageRecord>, stage: &Stage, n_in: usize, outcome: &SelectionOutcome<K>) -> Result<(), PeriodError> {
    records.push(StageRecord { stage: stage.name(), n_in, n_kept: outcome.kept.len() });
    if outcome.kept.is_empty() {
        return Err(PeriodError::EmptyStage(stage.name()));
    }
    Ok(())
}

/// Applies the configured stages; returns the features and history ordinals
/// that survive.
fn run_stages(
    spec: &PipelineSpec,
    learner: &Learner,
    history: &[LabelledBlock],
    validation: &LabelledBlock,
    mut features: Vec<String>,
    records: &mut Vec<StageRecord>,
) -> Result<(Vec<String>, Vec<usize>), PeriodError> {
    let mut kept: Vec<usize> = history.iter().map(|b| b.ordinal).collect();
    let validation_set = std::slice::from_ref(validation);
    let metric = spec.selection_metric;
    for stage in &spec.stages {
        let blocks: Vec<LabelledBlock> = history.iter().filter(|b| kept.contains(&b.ordinal)).cloned().collect();
        let n_in = features.len();
        match *stage {
            Stage::PeriodSubset => {
                let out = select_training_periods(&blocks, &features, learner, validation_set, metric, spec.subset)?;
                records.push(StageRecord { stage: stage.name(), n_in: blocks.len(), n_kept: out.kept.len() });
                kept = out.kept;
            }
            Stage::SignStability { max_flips } => {
                let (out, _) =
                    sign_stability_filter(&blocks, validation_set, &features, &StabilityWindow::standard_set(), max_flips)?;
                record_stage(records, stage, n_in, &out)?;
                features = out.kept;
            }
            Stage::SingleFeatureScreen => {
                let out = single_feature_screen(&features, learner, &blocks, validation_set, metric)?;
                record_stage(records, stage, n_in, &out)?;
                features = out.kept;
            }
            Stage::RedundancyPrune { threshold } => {
                let means = period_mean_matrix(&blocks, &features)?;
                let out = redundancy_prune(&features, &means, threshold)?;
                record_stage(records, stage, n_in, &out)?;
                features = out.kept;
            }
            Stage::CorrelationOrder => {
                let parts = blocks.iter().map(|b| b.x.select_columns(&features)).collect::<Result<Vec<_>, _>>()?;
                let refs: Vec<&FeatureMatrix> = parts.iter().collect();
                let y: Vec<f64> = blocks.iter().flat_map(|b| b.y.iter().copied()).collect();
                features = order_features_by_correlation(&FeatureMatrix::vstack(&refs)?, &y);
                records.push(StageRecord { stage: stage.name(), n_in, n_kept: features.len() });
            }
            Stage::Stepwise => {
                let (head, tail) = split_fit_feedback(validation)
                    .ok_or_else(|| PeriodError::InsufficientHistory("stepwise needs two validation rows".into()))?;
                let mut fit_blocks = blocks;
                fit_blocks.push(head);
                let out = stepwise_forward_select(&features, learner, &fit_blocks, &[tail], metric, TIE_EPSILON)?;
                record_stage(records, stage, n_in, &out)?;
                features = out.kept;
            }
            Stage::TopK { k } => {
                features.truncate(k);
                records.push(StageRecord { stage: stage.name(), n_in, n_kept: features.len() });
            }
        }
    }
    Ok((features, kept))
}
