//! Cross-sectional stock ranking toolkit.
//!
//! Builds features from challenge-format panels of anonymised monthly
//! variables, fits a zoo of linear models, runs period/feature/model
//! selection and evaluates everything in a leakage-safe walk-forward
//! backtest scored by Spearman correlation and NDCG of the top 20%.
//!
//! With the default `parallel` feature, independent work (periods, grid
//! candidates, Gram entries) runs on rayon; without it everything runs
//! sequentially with bit-identical results.

pub mod backtest;
pub mod features;
pub mod linalg;
pub mod metrics;
pub mod models;
pub mod panel;
pub mod par;
pub mod ranks;
pub mod selection;
pub mod synth;
pub mod target;
