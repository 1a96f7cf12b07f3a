use serde::{Deserialize, Serialize};

use super::SelectionError;
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEntry {
    pub index: usize,
    pub label: String,
    pub score: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub best: usize,
    pub best_score: f64,
    pub table: Vec<GridEntry>,
}

/// Scores every candidate (concurrently) and returns the highest-scoring
/// one; ties go to the earlier candidate. Failed candidates stay in the
/// table with their error.
pub fn grid_search_best<C, L, F>(candidates: &[C], label: L, score: F) -> Result<GridResult, SelectionError>
where
    C: Sync,
    L: Fn(&C) -> String,
    F: Fn(&C) -> Result<f64, SelectionError> + Sync + Send,
{
    if candidates.is_empty() {
        return Err(SelectionError::EmptyInput("no grid candidates".into()));
    }
    let scores = par::map(candidates, |c| score(c));
    let mut best: Option<(usize, f64)> = None;
    let mut table = Vec::with_capacity(candidates.len());
    let mut last_error = String::new();
    for (i, (c, s)) in candidates.iter().zip(scores).enumerate() {
        match s {
            Ok(v) if v.is_finite() => {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((i, v));
                }
                table.push(GridEntry { index: i, label: label(c), score: Some(v), error: None });
            }
            Ok(v) => {
                last_error = format!("non-finite score {v}");
                table.push(GridEntry { index: i, label: label(c), score: None, error: Some(last_error.clone()) });
            }
            Err(e) => {
                last_error = e.to_string();
                table.push(GridEntry { index: i, label: label(c), score: None, error: Some(last_error.clone()) });
            }
        }
    }
    match best {
        Some((best, best_score)) => Ok(GridResult { best, best_score, table }),
        None => Err(SelectionError::AllCandidatesFailed(last_error)),
    }
}
