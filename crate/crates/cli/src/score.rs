//! Offline scoring of prediction files against truth files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use stockrank::metrics::{ndcg_top_fraction, spearman, DEFAULT_NDCG_FRACTION};
use stockrank::panel::{ID_COLUMN, PERIOD_COLUMN, TARGET_COLUMN, TRAIN_COLUMN};

type ByPeriod = BTreeMap<String, BTreeMap<String, f64>>;

#[derive(Debug, Serialize)]
pub struct PeriodScore {
    pub period: String,
    pub n: usize,
    pub spearman: f64,
    pub ndcg: f64,
}

#[derive(Debug, Serialize)]
pub struct ScoreSummary {
    pub per_period: Vec<PeriodScore>,
    pub spearman_mean: f64,
    pub ndcg_mean: f64,
}

/// Rounds to 10 significant digits; serialization then prints the shortest
/// decimal of the rounded value.
pub fn sig10(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.9e}").parse().expect("formatted float parses")
}

fn column(headers: &csv::StringRecord, names: &[&str]) -> Option<usize> {
    headers.iter().position(|h| names.contains(&h.trim()))
}

/// Reads `(period, obs_id) -> value` from `value_columns` (first match).
/// With `test_only`, rows whose `Train` column is 1 are skipped; rows with
/// an empty value are skipped.
fn read_values(path: &Path, value_columns: &[&str], test_only: bool) -> Result<ByPeriod, String> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let headers = reader.headers().map_err(|e| format!("{}: {e}", path.display()))?.clone();
    let need = |names: &[&str]| column(&headers, names).ok_or_else(|| format!("{}: missing column {}", path.display(), names.join("/")));
    let (p, i, v) = (need(&[PERIOD_COLUMN])?, need(&[ID_COLUMN])?, need(value_columns)?);
    let train = if test_only { column(&headers, &[TRAIN_COLUMN]) } else { None };
    let mut out = ByPeriod::new();
    for (n, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| format!("{}: {e}", path.display()))?;
        if let Some(t) = train {
            if matches!(rec.get(t).map(str::trim), Some("1") | Some("true") | Some("True")) {
                continue;
            }
        }
        let raw = rec.get(v).unwrap_or("").trim();
        if raw.is_empty() {
            continue;
        }
        let value: f64 = raw
            .parse()
            .map_err(|_| format!("{}: row {}: `{raw}` is not a number", path.display(), n + 2))?;
        let id = rec.get(i).unwrap_or("").trim().to_string();
        if out.entry(rec.get(p).unwrap_or("").trim().to_string()).or_default().insert(id.clone(), value).is_some() {
            return Err(format!("{}: duplicate obs_id {id}", path.display()));
        }
    }
    Ok(out)
}

/// Scores predictions per period. Truth may cover extra periods; any other
/// structural problem (unreadable or malformed file, a predicted period
/// without truth, mismatched identifiers) is an error.
pub fn score_files(pred: &Path, truth: &Path) -> Result<ScoreSummary, String> {
    let pred = read_values(pred, &["score"], false)?;
    let truth = read_values(truth, &["target", TARGET_COLUMN], true)?;
    if let Some(missing) = pred.keys().find(|k| !truth.contains_key(*k)) {
        return Err(format!("period {missing} has predictions but no truth rows"));
    }
    let mut per_period = Vec::new();
    let (mut s_sum, mut g_sum) = (0.0, 0.0);
    for (period, p) in &pred {
        let t = &truth[period];
        if p.keys().ne(t.keys()) {
            return Err(format!("obs_id sets differ in period {period}"));
        }
        let pv: Vec<f64> = p.values().copied().collect();
        let tv: Vec<f64> = t.values().copied().collect();
        let s = spearman(&pv, &tv).map_err(|e| format!("period {period}: {e}"))?;
        let g = ndcg_top_fraction(&pv, &tv, DEFAULT_NDCG_FRACTION).map_err(|e| format!("period {period}: {e}"))?;
        s_sum += s;
        g_sum += g;
        per_period.push(PeriodScore { period: period.clone(), n: pv.len(), spearman: sig10(s), ndcg: sig10(g) });
    }
    if per_period.is_empty() {
        return Err("no scorable rows".into());
    }
    let k = per_period.len() as f64;
    let spearman_mean = sig10(s_sum / k);
    let ndcg_mean = sig10(g_sum / k);
    Ok(ScoreSummary { per_period, spearman_mean, ndcg_mean })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_significant_digits() {
        assert_eq!(sig10(0.8), 0.8);
        assert_eq!(sig10(0.12345678901234), 0.123456789);
        assert_eq!(sig10(-1.0), -1.0);
        assert_eq!(sig10(0.0), 0.0);
        assert_eq!(serde_json::to_string(&sig10(0.9999999999999998)).unwrap(), "1.0");
    }
}
