//! Deterministic synthetic panels with known ground truth.
//!
//! # Generator
//!
//! All randomness comes from SplitMix64. With 64-bit wrapping arithmetic and
//! state `s` initialised to the seed, each draw is
//!
//! ```text
//! s = s + 0x9E3779B97F4A7C15
//! z = s
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! out = z ^ (z >> 31)
//! ```
//!
//! A uniform in `[0, 1)` is `(out >> 11) * 2^-53`. Standard normals use the
//! Box-Muller cosine branch on two uniforms `u1, u2`:
//! `sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`.
//!
//! # Draw order
//!
//! For each period in order, for each stock in order: the `n_variables *
//! n_months` monthly values (variable-major), one noise normal, then one
//! uniform per cell for missingness. After a period's stocks, its train
//! flags are drawn by a Fisher-Yates shuffle of stock indices (uniform
//! `j = floor(u * (i + 1))` for `i` descending); the first
//! `round(train_fraction * n_stocks)` shuffled stocks are training rows.
//! Draws happen whether or not noise or missingness is enabled, so the
//! stream layout depends only on the shape.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::panel::{label_after, parse_label, ColumnSchema, Panel, PanelError, StockObservation};

pub const GENERATOR_NAME: &str = "splitmix64";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    InvalidConfig(String),
    #[error("generated panel failed validation: {0}")]
    Panel(String),
}

impl From<PanelError> for SynthError {
    fn from(e: PanelError) -> Self {
        SynthError::Panel(e.to_string())
    }
}

/// SplitMix64 stream.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

fn default_months() -> usize {
    6
}

fn default_train_fraction() -> f64 {
    0.6
}

fn default_start() -> String {
    "1996_2".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub n_periods: usize,
    pub n_stocks: usize,
    pub n_variables: usize,
    #[serde(default = "default_months")]
    pub n_months: usize,
    /// One coefficient vector per regime, each of length `n_variables`.
    pub true_coefficients: Vec<Vec<f64>>,
    /// Regime index of each period in ordinal order; all regime 0 if absent.
    #[serde(default)]
    pub regime_of_period: Option<Vec<usize>>,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub missing_rate: f64,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    pub seed: u64,
    /// Label of ordinal 1.
    #[serde(default = "default_start")]
    pub start_label: String,
    /// Withhold every target of the last period.
    #[serde(default)]
    pub unlabelled_final_period: bool,
}

impl SynthConfig {
    /// Single regime, no noise, no missingness.
    pub fn noiseless(n_periods: usize, n_stocks: usize, coefficients: Vec<f64>, seed: u64) -> Self {
        Self {
            n_periods,
            n_stocks,
            n_variables: coefficients.len(),
            n_months: default_months(),
            true_coefficients: vec![coefficients],
            regime_of_period: None,
            noise_sigma: 0.0,
            missing_rate: 0.0,
            train_fraction: default_train_fraction(),
            seed,
            start_label: default_start(),
            unlabelled_final_period: false,
        }
    }

    pub fn schema(&self) -> ColumnSchema {
        ColumnSchema { n_variables: self.n_variables, n_months: self.n_months }
    }

    pub fn regimes(&self) -> Vec<usize> {
        self.regime_of_period.clone().unwrap_or_else(|| vec![0; self.n_periods])
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        if self.n_periods == 0 || self.n_stocks == 0 || self.n_variables == 0 || self.n_months == 0 {
            return bad("n_periods, n_stocks, n_variables and n_months must be >= 1".into());
        }
        if self.true_coefficients.is_empty() {
            return bad("true_coefficients needs at least one regime".into());
        }
        if let Some(i) = self.true_coefficients.iter().position(|c| c.len() != self.n_variables) {
            return bad(format!("regime {i} has {} coefficients, expected {}", self.true_coefficients[i].len(), self.n_variables));
        }
        if self.true_coefficients.iter().flatten().any(|c| !c.is_finite()) {
            return bad("coefficients must be finite".into());
        }
        if let Some(map) = &self.regime_of_period {
            if map.len() != self.n_periods {
                return bad(format!("regime_of_period has {} entries, expected {}", map.len(), self.n_periods));
            }
            if let Some(r) = map.iter().find(|&&r| r >= self.true_coefficients.len()) {
                return bad(format!("regime index {r} out of range"));
            }
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad(format!("noise_sigma must be finite and >= 0, got {}", self.noise_sigma));
        }
        if !(0.0..1.0).contains(&self.missing_rate) {
            return bad(format!("missing_rate must be in [0, 1), got {}", self.missing_rate));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!("train_fraction must be in (0, 1), got {}", self.train_fraction));
        }
        if parse_label(&self.start_label).is_none() {
            return bad(format!("start_label `{}` is not YYYY_H", self.start_label));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub generator: String,
    pub seed: u64,
    pub coefficients: Vec<Vec<f64>>,
    pub regime_of_period: Vec<usize>,
    pub labels: Vec<String>,
    pub noise_sigma: f64,
}

pub fn generate_panel(config: &SynthConfig) -> Result<(Panel, GroundTruth), SynthError> {
    config.validate()?;
    let schema = config.schema();
    let regimes = config.regimes();
    let (year, half) = parse_label(&config.start_label).expect("validated");
    let mut rng = SplitMix64::new(config.seed);
    let n_train = ((config.train_fraction * config.n_stocks as f64).round() as usize)
        .clamp(1, config.n_stocks.saturating_sub(1).max(1));
    let mut groups = Vec::with_capacity(config.n_periods);
    let mut labels = Vec::with_capacity(config.n_periods);
    for p in 0..config.n_periods {
        let coef = &config.true_coefficients[regimes[p]];
        let labelled = !(config.unlabelled_final_period && p + 1 == config.n_periods);
        let mut obs = Vec::with_capacity(config.n_stocks);
        for s in 0..config.n_stocks {
            let values: Vec<f64> = (0..schema.cells()).map(|_| rng.normal()).collect();
            let noise = rng.normal();
            let signal: f64 = coef
                .iter()
                .enumerate()
                .map(|(v, c)| {
                    let cells = &values[v * config.n_months..(v + 1) * config.n_months];
                    c * cells.iter().sum::<f64>() / config.n_months as f64
                })
                .sum();
            let monthly = values
                .iter()
                .map(|&x| if rng.uniform() < config.missing_rate { None } else { Some(x) })
                .collect();
            obs.push(StockObservation {
                obs_id: format!("s{s:05}"),
                monthly,
                is_train: false,
                target: labelled.then_some(signal + config.noise_sigma * noise),
            });
        }
        let mut order: Vec<usize> = (0..config.n_stocks).collect();
        for i in (1..order.len()).rev() {
            let j = ((rng.uniform() * (i + 1) as f64) as usize).min(i);
            order.swap(i, j);
        }
        for &i in &order[..n_train.min(config.n_stocks)] {
            obs[i].is_train = true;
        }
        let label = label_after(year, half, p);
        labels.push(label.clone());
        groups.push((label, obs));
    }
    let source = format!("synth:{GENERATOR_NAME}:seed={}", config.seed);
    let panel = Panel::from_periods(schema, groups, source)?;
    let truth = GroundTruth {
        generator: GENERATOR_NAME.into(),
        seed: config.seed,
        coefficients: config.true_coefficients.clone(),
        regime_of_period: regimes,
        labels,
        noise_sigma: config.noise_sigma,
    };
    Ok((panel, truth))
}
