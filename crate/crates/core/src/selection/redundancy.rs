use super::{Dropped, LabelledBlock, SelectionError, SelectionOutcome};
use crate::features::{FeatureMatrix, RowId};
use crate::metrics::pearson;

/// One row per block holding the block's mean of each feature.
pub fn period_mean_matrix(blocks: &[LabelledBlock], features: &[String]) -> Result<FeatureMatrix, SelectionError> {
    let ids = blocks.iter().map(|b| RowId { ordinal: b.ordinal, obs_id: "mean".into() }).collect();
    let mut m = FeatureMatrix::empty(ids);
    for f in features {
        let col = blocks
            .iter()
            .map(|b| {
                b.x.column(f)
                    .map(|c| c.iter().sum::<f64>() / c.len().max(1) as f64)
                    .ok_or_else(|| crate::features::FeatureError::UnknownColumn(f.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        m.push_column(f.clone(), col)?;
    }
    Ok(m)
}

/// Drops features whose per-period means correlate at `|r| >= threshold`
/// with a more significant feature that was kept. `ranked` is ordered most
/// significant first; each feature is compared only against kept features,
/// so a dropped feature never causes another drop. Undefined correlations
/// (constant series) count as 0.
pub fn redundancy_prune(
    ranked: &[String],
    period_means: &FeatureMatrix,
    threshold: f64,
) -> Result<SelectionOutcome<String>, SelectionError> {
    if ranked.is_empty() {
        return Err(SelectionError::EmptyInput("no ranked features".into()));
    }
    let mut outcome: SelectionOutcome<String> = SelectionOutcome::new();
    for f in ranked {
        let col = period_means
            .column(f)
            .ok_or_else(|| crate::features::FeatureError::UnknownColumn(f.clone()))?;
        let clash = outcome.kept.iter().find_map(|k| {
            let r = pearson(col, period_means.column(k).unwrap_or(&[])).unwrap_or(0.0);
            (r.abs() >= threshold).then(|| (k.clone(), r))
        });
        match clash {
            Some((k, r)) => outcome.dropped.push(Dropped { item: f.clone(), reason: format!("|r|={:.4} with {k}", r.abs()) }),
            None => outcome.kept.push(f.clone()),
        }
    }
    Ok(outcome)
}
