use serde::{Deserialize, Serialize};

use super::{Dropped, LabelledBlock, SelectionError, SelectionOutcome, TraceStep};
use crate::metrics::pearson;
use crate::par;

pub const DEFAULT_MAX_FLIPS: usize = 10;

/// A look-back window: the most recent `n` history periods, or all of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityWindow {
    Last(usize),
    All,
}

impl StabilityWindow {
    /// Lengths 2 through 30 plus the whole history.
    pub fn standard_set() -> Vec<StabilityWindow> {
        (2..=30).map(StabilityWindow::Last).chain([StabilityWindow::All]).collect()
    }

    pub fn label(&self) -> String {
        match self {
            StabilityWindow::Last(n) => n.to_string(),
            StabilityWindow::All => "all".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignStabilityStat {
    pub feature: String,
    pub validation_sign: i8,
    /// `(window label, correlation sign)` for each usable window.
    pub window_signs: Vec<(String, i8)>,
    pub flip_count: usize,
}

fn sign_of(x: &[f64], y: &[f64]) -> i8 {
    match pearson(x, y) {
        Ok(r) if r > 0.0 => 1,
        Ok(r) if r < 0.0 => -1,
        _ => 0,
    }
}

fn pooled(blocks: &[LabelledBlock], feature: &str) -> Result<(Vec<f64>, Vec<f64>), SelectionError> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for b in blocks {
        let col = b
            .x
            .column(feature)
            .ok_or_else(|| crate::features::FeatureError::UnknownColumn(feature.to_string()))?;
        xs.extend_from_slice(col);
        ys.extend_from_slice(&b.y);
    }
    Ok((xs, ys))
}

/// Counts, per feature, the look-back windows whose pooled feature/target
/// correlation sign disagrees with the sign on the validation rows.
/// Windows needing more periods than `history` holds are skipped. Features
/// with more than `max_flips` disagreements are dropped; the rest are kept
/// in ascending flip order (ties keep input order).
pub fn sign_stability_filter(
    history: &[LabelledBlock],
    validation: &[LabelledBlock],
    features: &[String],
    windows: &[StabilityWindow],
    max_flips: usize,
) -> Result<(SelectionOutcome<String>, Vec<SignStabilityStat>), SelectionError> {
    let mut chrono: Vec<&LabelledBlock> = history.iter().collect();
    chrono.sort_by_key(|b| b.ordinal);
    let usable: Vec<(StabilityWindow, usize)> = windows
        .iter()
        .filter_map(|w| match *w {
            StabilityWindow::Last(n) if n >= 1 && n <= chrono.len() => Some((*w, n)),
            StabilityWindow::All if !chrono.is_empty() => Some((*w, chrono.len())),
            _ => None,
        })
        .collect();
    if usable.is_empty() {
        return Err(SelectionError::NoUsableWindow);
    }
    let sorted: Vec<LabelledBlock> = chrono.into_iter().cloned().collect();
    let stats = par::map(features, |f| -> Result<SignStabilityStat, SelectionError> {
        let (vx, vy) = pooled(validation, f)?;
        let validation_sign = sign_of(&vx, &vy);
        let mut window_signs = Vec::with_capacity(usable.len());
        let mut flip_count = 0;
        for (w, n) in &usable {
            let (x, y) = pooled(&sorted[sorted.len() - n..], f)?;
            let s = sign_of(&x, &y);
            if s != validation_sign {
                flip_count += 1;
            }
            window_signs.push((w.label(), s));
        }
        Ok(SignStabilityStat { feature: f.clone(), validation_sign, window_signs, flip_count })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;

    let mut outcome = SelectionOutcome::new();
    let mut kept: Vec<&SignStabilityStat> = Vec::new();
    for st in &stats {
        if st.flip_count > max_flips {
            outcome.dropped.push(Dropped { item: st.feature.clone(), reason: format!("{} sign flips", st.flip_count) });
        } else {
            kept.push(st);
        }
    }
    kept.sort_by_key(|s| s.flip_count);
    outcome.kept = kept.iter().map(|s| s.feature.clone()).collect();
    outcome.score_trace = kept
        .iter()
        .enumerate()
        .map(|(i, s)| TraceStep { step: i, score: s.flip_count as f64 })
        .collect();
    Ok((outcome, stats))
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::{block, names, Lcg};
    use super::*;

    fn history(n: usize, sign: f64, seed: u64) -> Vec<LabelledBlock> {
        let mut rng = Lcg(seed);
        (1..=n)
            .map(|o| {
                let y: Vec<f64> = (0..12).map(|_| rng.next_f64()).collect();
                let rows = y.iter().map(|t| vec![*t, sign * t]).collect::<Vec<_>>();
                block(o, &["same", "neg"], &rows, y)
            })
            .collect()
    }

    #[test]
    fn identical_and_negated_features() {
        let hist = history(12, -1.0, 1);
        let val = history(1, 1.0, 2);
        let (out, stats) =
            sign_stability_filter(&hist, &val, &names(&["neg", "same"]), &StabilityWindow::standard_set(), DEFAULT_MAX_FLIPS).unwrap();
        // windows 2..=12 plus all: 12 usable
        assert_eq!(stats[0].window_signs.len(), 12);
        assert_eq!(stats[0].flip_count, 12);
        assert_eq!(stats[1].flip_count, 0);
        assert_eq!(out.kept, names(&["same"]));
        assert_eq!(out.dropped[0].item, "neg");
    }

    #[test]
    fn no_history_is_an_error() {
        let val = history(1, 1.0, 2);
        assert_eq!(
            sign_stability_filter(&[], &val, &names(&["same"]), &StabilityWindow::standard_set(), 10).map(|_| ()),
            Err(SelectionError::NoUsableWindow)
        );
        let hist = history(1, 1.0, 3);
        // only "all" fits a one-period history
        let (_, stats) = sign_stability_filter(&hist, &val, &names(&["same"]), &StabilityWindow::standard_set(), 10).unwrap();
        assert_eq!(stats[0].window_signs, vec![("all".to_string(), 1)]);
    }
}
