use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BacktestError, PipelineSpec};
use crate::models::ModelSpec;
use crate::selection::GridEntry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodStatus {
    /// Predicted and scored against test-row targets.
    Scored,
    /// Predicted, but the test rows carry no targets.
    Unscored,
    Failed,
}

impl PeriodStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            PeriodStatus::Scored => "scored",
            PeriodStatus::Unscored => "unscored",
            PeriodStatus::Failed => "failed",
        }
    }
}

/// Summary of one selection stage for one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub n_in: usize,
    pub n_kept: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodRecord {
    pub period: String,
    pub ordinal: usize,
    pub status: PeriodStatus,
    pub error: Option<String>,
    pub model: Option<ModelSpec>,
    pub model_label: Option<String>,
    pub features: Vec<String>,
    pub periods_kept: Vec<usize>,
    pub stages: Vec<StageRecord>,
    pub validation_score: Option<f64>,
    pub grid: Vec<GridEntry>,
    pub n_predicted: usize,
    pub spearman: Option<f64>,
    pub ndcg: Option<f64>,
    pub combined: Option<f64>,
}

impl PeriodRecord {
    pub(crate) fn failed(period: String, ordinal: usize, error: String) -> Self {
        Self {
            period,
            ordinal,
            status: PeriodStatus::Failed,
            error: Some(error),
            model: None,
            model_label: None,
            features: Vec::new(),
            periods_kept: Vec::new(),
            stages: Vec::new(),
            validation_score: None,
            grid: Vec::new(),
            n_predicted: 0,
            spearman: None,
            ndcg: None,
            combined: None,
        }
    }
}

/// Mean and sample standard deviation over the scored periods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub n: usize,
    pub mean: Option<f64>,
    /// `None` with fewer than two values.
    pub std: Option<f64>,
}

impl MetricSummary {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { n, mean: None, std: None };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = (n >= 2).then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt());
        Self { n, mean: Some(mean), std }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub spearman: MetricSummary,
    pub ndcg: MetricSummary,
    pub combined: MetricSummary,
}

impl Aggregates {
    pub fn from_records(records: &[PeriodRecord]) -> Self {
        let pick = |f: fn(&PeriodRecord) -> Option<f64>| {
            let v: Vec<f64> = records.iter().filter_map(f).collect();
            MetricSummary::from_values(&v)
        };
        Self { spearman: pick(|r| r.spearman), ndcg: pick(|r| r.ndcg), combined: pick(|r| r.combined) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportProvenance {
    pub spec: PipelineSpec,
    pub data_checksum: String,
    pub n_periods: usize,
    pub n_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub records: Vec<PeriodRecord>,
    pub aggregates: Aggregates,
    pub provenance: ReportProvenance,
}

impl BacktestReport {
    pub fn n_succeeded(&self) -> usize {
        self.records.iter().filter(|r| r.status != PeriodStatus::Failed).count()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// One row per period: `period,model,spearman,ndcg,combined,n_features,n_periods_kept,status`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("period,model,spearman,ndcg,combined,n_features,n_periods_kept,status\n");
        let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.period,
                csv_field(r.model_label.as_deref().unwrap_or("")),
                num(r.spearman),
                num(r.ndcg),
                num(r.combined),
                r.features.len(),
                r.periods_kept.len(),
                r.status.as_str()
            );
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Csv,
}

pub fn emit_report(report: &BacktestReport, format: ReportFormat, path: impl AsRef<Path>) -> Result<(), BacktestError> {
    let body = match format {
        ReportFormat::Json => report.to_json(),
        ReportFormat::Csv => report.to_csv(),
    };
    fs::write(path, body)?;
    Ok(())
}

/// Test-row predictions of one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodPredictions {
    pub period: String,
    pub ordinal: usize,
    pub obs_ids: Vec<String>,
    pub scores: Vec<f64>,
}

impl PeriodPredictions {
    /// `period_label,obs_id,score` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("period_label,obs_id,score\n");
        for (id, s) in self.obs_ids.iter().zip(&self.scores) {
            let _ = writeln!(out, "{},{},{}", self.period, csv_field(id), s);
        }
        out
    }
}
