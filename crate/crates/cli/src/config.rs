//! Run configuration documents.
//!
//! See `docs/run_config.schema.json` for the published schema. Unknown keys
//! are rejected at every level.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stockrank::backtest::PipelineSpec;
use stockrank::panel::ColumnSchema;
use stockrank::synth::SynthConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Synthetic panel to generate (for `synth`, or as backtest data).
    #[serde(default)]
    pub synth: Option<SynthConfig>,
    /// Challenge-format CSV to backtest; relative paths resolve against the
    /// config file's directory.
    #[serde(default)]
    pub data: Option<PathBuf>,
    /// Column layout of `data`; 70 variables by 6 months if absent.
    #[serde(default)]
    pub columns: Option<ColumnSchema>,
    #[serde(default)]
    pub pipeline: Option<PipelineSpec>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut config: RunConfig =
            serde_json::from_str(&text).map_err(|e| format!("config {} violates the schema: {e}", path.display()))?;
        if let Some(data) = &config.data {
            if data.is_relative() {
                if let Some(dir) = path.parent() {
                    config.data = Some(dir.join(data));
                }
            }
        }
        Ok(config)
    }

    pub fn column_schema(&self) -> ColumnSchema {
        self.columns
            .or_else(|| self.synth.as_ref().map(SynthConfig::schema))
            .unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_and_full_documents() {
        let c: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c.column_schema(), ColumnSchema::default());
        let c: RunConfig = serde_json::from_str(
            r#"{"synth":{"n_periods":3,"n_stocks":10,"n_variables":2,"n_months":2,"true_coefficients":[[1,2]],"seed":1},
                "pipeline":{"model_grid":[{"kind":{"type":"ols"}}],"first_eval_ordinal":2}}"#,
        )
        .unwrap();
        assert_eq!(c.column_schema(), ColumnSchema { n_variables: 2, n_months: 2 });
        assert!(serde_json::from_str::<RunConfig>(r#"{"pipline":{}}"#).is_err());
    }

    #[test]
    fn published_schema_is_json() {
        let text = include_str!("../../../docs/run_config.schema.json");
        let v: serde_json::Value = serde_json::from_str(text).unwrap();
        assert_eq!(v["additionalProperties"], serde_json::Value::Bool(false));
    }

    #[test]
    fn example_config_is_valid() {
        let c: RunConfig = serde_json::from_str(include_str!("../../../docs/example_config.json")).unwrap();
        c.pipeline.expect("pipeline").validate().unwrap();
        c.synth.expect("synth").validate().unwrap();
    }
}
