use super::{ensure_validation, Dropped, LabelledBlock, Learner, SelectionError, SelectionOutcome, TraceStep};
use crate::features::FeatureMatrix;
use crate::metrics::{pearson, MetricKind};
use crate::par;

/// Feature names sorted by `|pearson(feature, y)|`, strongest first.
/// Constant features (correlation undefined) go last; ties keep column order.
pub fn order_features_by_correlation(x: &FeatureMatrix, y: &[f64]) -> Vec<String> {
    let keys: Vec<(bool, f64)> = par::map(x.columns(), |c| match pearson(c, y) {
        Ok(r) => (false, r.abs()),
        Err(_) => (true, 0.0),
    });
    let mut idx: Vec<usize> = (0..x.n_cols()).collect();
    idx.sort_by(|&a, &b| {
        keys[a]
            .0
            .cmp(&keys[b].0)
            .then(keys[b].1.total_cmp(&keys[a].1))
            .then(a.cmp(&b))
    });
    idx.into_iter().map(|i| x.names()[i].clone()).collect()
}

/// Splits a block into its first `ceil(0.6 n)` rows and the remainder, both
/// non-empty. `None` for blocks with fewer than two rows.
pub fn split_fit_feedback(block: &LabelledBlock) -> Option<(LabelledBlock, LabelledBlock)> {
    let n = block.len();
    if n < 2 {
        return None;
    }
    let head = (n * 3).div_ceil(5).clamp(1, n - 1);
    let first: Vec<usize> = (0..head).collect();
    let rest: Vec<usize> = (head..n).collect();
    Some((block.select_rows(&first), block.select_rows(&rest)))
}

/// Greedy forward selection in the given feature order.
///
/// A feature joins when the model refitted with it scores more than
/// `tie_epsilon` above the best score so far on `feedback`. The empty model
/// has no ranking, so the first feature that fits and scores is always
/// taken; if none does, the first candidate is kept anyway.
pub fn stepwise_forward_select<B: AsRef<LabelledBlock> + Sync>(
    ordered: &[String],
    learner: &Learner,
    fit_blocks: &[B],
    feedback: &[LabelledBlock],
    metric: MetricKind,
    tie_epsilon: f64,
) -> Result<SelectionOutcome<String>, SelectionError> {
    if ordered.is_empty() {
        return Err(SelectionError::EmptyInput("no candidate features".into()));
    }
    ensure_validation(feedback)?;
    let mut outcome = SelectionOutcome::new();
    let mut best: Option<f64> = None;
    for name in ordered {
        let mut trial = outcome.kept.clone();
        trial.push(name.clone());
        outcome.model_fits += 1;
        match learner.fit_and_score(fit_blocks, &trial, feedback, metric) {
            Ok(s) if best.is_none_or(|b| s > b + tie_epsilon) => {
                best = Some(s);
                outcome.kept.push(name.clone());
                outcome.score_trace.push(TraceStep { step: outcome.score_trace.len(), score: s });
            }
            Ok(s) => outcome.dropped.push(Dropped { item: name.clone(), reason: format!("no improvement ({s})") }),
            Err(e) => outcome.dropped.push(Dropped { item: name.clone(), reason: format!("fit failed: {e}") }),
        }
    }
    if outcome.kept.is_empty() {
        let first = ordered[0].clone();
        outcome.dropped.retain(|d| d.item != first);
        outcome.kept.push(first);
    }
    Ok(outcome)
}

/// Scores a one-feature model per feature, drops those scoring `<= 0` (or
/// failing), and ranks the rest best first (ties keep input order).
pub fn single_feature_screen<B: AsRef<LabelledBlock> + Sync>(
    features: &[String],
    learner: &Learner,
    fit_blocks: &[B],
    validation: &[LabelledBlock],
    metric: MetricKind,
) -> Result<SelectionOutcome<String>, SelectionError> {
    ensure_validation(validation)?;
    let scores = par::map(features, |f| learner.fit_and_score(fit_blocks, std::slice::from_ref(f), validation, metric));
    let mut outcome = SelectionOutcome::new();
    outcome.model_fits = features.len();
    let mut survivors = Vec::new();
    for (i, (f, s)) in features.iter().zip(scores).enumerate() {
        match s {
            Ok(s) => {
                outcome.score_trace.push(TraceStep { step: i, score: s });
                if s > 0.0 {
                    survivors.push((f.clone(), s));
                } else {
                    outcome.dropped.push(Dropped { item: f.clone(), reason: format!("single-feature score {s} <= 0") });
                }
            }
            Err(e) => outcome.dropped.push(Dropped { item: f.clone(), reason: format!("fit failed: {e}") }),
        }
    }
    survivors.sort_by(|a, b| b.1.total_cmp(&a.1));
    outcome.kept = survivors.into_iter().map(|(f, _)| f).collect();
    Ok(outcome)
}
