use serde::{Deserialize, Serialize};

use super::FeatureError;

/// Window and smoothing parameters for the period-level indicators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndicatorParams {
    pub ma_window: usize,
    pub ema_alpha: f64,
    pub momentum_lag: usize,
    pub roc_lag: usize,
}

impl Default for IndicatorParams {
    fn default() -> Self {
        Self { ma_window: 3, ema_alpha: 0.5, momentum_lag: 1, roc_lag: 1 }
    }
}

impl IndicatorParams {
    pub fn validate(&self) -> Result<(), FeatureError> {
        let ok = self.ma_window >= 1
            && self.ema_alpha > 0.0
            && self.ema_alpha <= 1.0
            && self.momentum_lag >= 1
            && self.roc_lag >= 1;
        if ok {
            Ok(())
        } else {
            Err(FeatureError::InvalidRecipe(format!("bad indicator params {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndicatorValues {
    pub moving_average: f64,
    pub ema: f64,
    pub momentum: f64,
    pub rate_of_change: f64,
}

pub const INDICATOR_NAMES: [&str; 4] = ["ind_ma", "ind_ema", "ind_momentum", "ind_roc"];

impl IndicatorValues {
    pub fn as_array(&self) -> [f64; 4] {
        [self.moving_average, self.ema, self.momentum, self.rate_of_change]
    }
}

/// Indicators over a chronologically ordered series of past period means.
/// The series must end strictly before the period being encoded.
pub fn technical_indicators(series: &[f64], params: &IndicatorParams) -> Result<IndicatorValues, FeatureError> {
    params.validate()?;
    let Some(&last) = series.last() else {
        return Err(FeatureError::EmptySeries);
    };
    let n = series.len();
    let k = params.ma_window.min(n);
    let moving_average = series[n - k..].iter().sum::<f64>() / k as f64;
    let a = params.ema_alpha;
    let ema = series[1..].iter().fold(series[0], |e, &s| a * s + (1.0 - a) * e);
    let momentum = if n > params.momentum_lag { last - series[n - 1 - params.momentum_lag] } else { 0.0 };
    let rate_of_change = if n > params.roc_lag {
        let base = series[n - 1 - params.roc_lag];
        if base == 0.0 {
            0.0
        } else {
            last / base - 1.0
        }
    } else {
        0.0
    };
    Ok(IndicatorValues { moving_average, ema, momentum, rate_of_change })
}
