use serde::{Deserialize, Serialize};

use super::{ensure_validation, Dropped, LabelledBlock, Learner, SelectionError, SelectionOutcome, TraceStep, TIE_EPSILON};
use crate::metrics::MetricKind;
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsetOptions {
    pub tie_epsilon: f64,
    pub max_sweeps: usize,
}

impl Default for SubsetOptions {
    fn default() -> Self {
        Self { tie_epsilon: TIE_EPSILON, max_sweeps: 10 }
    }
}

/// Greedy backward elimination of training periods.
///
/// Starts from every block, then sweeps the periods in ascending ordinal
/// order, tentatively removing each one still present. A removal is kept iff
/// the validation score beats the current score by more than `tie_epsilon`
/// and at least one period remains; the current score is updated after each
/// accepted removal. Sweeps repeat until one makes no change or
/// `max_sweeps` is reached.
///
/// Tentative removals are evaluated speculatively in chunks of the pool
/// width, but decisions are applied strictly in sweep order, so the result
/// is the serial one.
pub fn select_training_periods(
    blocks: &[LabelledBlock],
    features: &[String],
    learner: &Learner,
    validation: &[LabelledBlock],
    metric: MetricKind,
    options: SubsetOptions,
) -> Result<SelectionOutcome<usize>, SelectionError> {
    if blocks.is_empty() {
        return Err(SelectionError::EmptyInput("no training periods".into()));
    }
    ensure_validation(validation)?;
    let mut order: Vec<usize> = (0..blocks.len()).collect();
    order.sort_by_key(|&i| blocks[i].ordinal);

    let score_subset = |members: &[usize]| -> Result<f64, SelectionError> {
        let chosen: Vec<&LabelledBlock> = members.iter().map(|&i| &blocks[i]).collect();
        learner.fit_and_score(&chosen, features, validation, metric)
    };

    let mut outcome = SelectionOutcome::new();
    let mut current = order.clone();
    let mut best = score_subset(&current)?;
    outcome.model_fits = 1;
    outcome.score_trace.push(TraceStep { step: 0, score: best });

    let chunk = par::width().max(1);
    for _ in 0..options.max_sweeps {
        let mut changed = false;
        // periods of this sweep, in ordinal order; removed ones are skipped
        let sweep: Vec<usize> = current.clone();
        let mut pos = 0;
        while pos < sweep.len() && current.len() > 1 {
            let end = (pos + chunk).min(sweep.len());
            let trials: Vec<usize> = sweep[pos..end].to_vec();
            let snapshot = current.clone();
            let scores = par::map(&trials, |&candidate| {
                let rest: Vec<usize> = snapshot.iter().copied().filter(|&i| i != candidate).collect();
                score_subset(&rest)
            });
            let mut accepted_at = None;
            for (k, (candidate, score)) in trials.iter().zip(&scores).enumerate() {
                outcome.model_fits += 1;
                if let Ok(s) = score {
                    if *s > best + options.tie_epsilon {
                        current.retain(|&i| i != *candidate);
                        best = *s;
                        changed = true;
                        outcome.score_trace.push(TraceStep { step: outcome.score_trace.len(), score: *s });
                        outcome.dropped.push(Dropped {
                            item: blocks[*candidate].ordinal,
                            reason: format!("removal raised validation score to {s}"),
                        });
                        accepted_at = Some(k);
                        break;
                    }
                }
            }
            pos = match accepted_at {
                Some(k) => pos + k + 1,
                None => end,
            };
        }
        if !changed {
            break;
        }
    }
    outcome.kept = current.iter().map(|&i| blocks[i].ordinal).collect();
    outcome.dropped.sort_by_key(|d| d.item);
    Ok(outcome)
}
