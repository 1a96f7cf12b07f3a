//! Training-target construction: plain rank normalisation and the
//! chronological power scaling followed by a global rank.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ranks::average_ranks;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TargetError {
    #[error("need at least 2 values, got {0}")]
    TooFewValues(usize),
    #[error("need at least 2 targets, got {0}")]
    TooFewTargets(usize),
    #[error("period ordinals must be >= 1")]
    ZeroOrdinal,
    #[error("power must be finite and >= 0, got {0}")]
    BadPower(f64),
}

/// Average ranks mapped affinely onto `[-1, 1]`.
pub fn rank_normalize(values: &[f64]) -> Result<Vec<f64>, TargetError> {
    let n = values.len();
    if n < 2 {
        return Err(TargetError::TooFewValues(n));
    }
    let denom = (n - 1) as f64;
    Ok(average_ranks(values)
        .into_iter()
        .map(|r| (2.0 * (r - 1.0) - denom) / denom)
        .collect())
}

/// Chronological scaling power. Output range is fixed at `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformSpec {
    pub power: f64,
}

impl Default for TransformSpec {
    fn default() -> Self {
        Self { power: 2.0 }
    }
}

/// Multiplies each raw target by `ordinal^power`, then rank-normalises all
/// entries jointly (signed values, ascending).
pub fn chrono_scale_rank(targets: &[(usize, f64)], spec: &TransformSpec) -> Result<Vec<f64>, TargetError> {
    if !(spec.power.is_finite() && spec.power >= 0.0) {
        return Err(TargetError::BadPower(spec.power));
    }
    if targets.len() < 2 {
        return Err(TargetError::TooFewTargets(targets.len()));
    }
    if targets.iter().any(|(t, _)| *t == 0) {
        return Err(TargetError::ZeroOrdinal);
    }
    let scaled: Vec<f64> = targets
        .iter()
        .map(|&(t, y)| y * (t as f64).powf(spec.power))
        .collect();
    rank_normalize(&scaled)
}

/// How training targets are presented to the learner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetMode {
    #[default]
    Raw,
    ChronoRank { power: f64 },
}

impl TargetMode {
    pub fn apply(&self, targets: &[(usize, f64)]) -> Result<Vec<f64>, TargetError> {
        match *self {
            TargetMode::Raw => Ok(targets.iter().map(|(_, y)| *y).collect()),
            TargetMode::ChronoRank { power } => chrono_scale_rank(targets, &TransformSpec { power }),
        }
    }
}
