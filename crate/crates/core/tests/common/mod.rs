#![allow(dead_code)]

use stockrank::features::{build_period_features, FeatureRecipe};
use stockrank::metrics::MetricKind;
use stockrank::models::{ModelKind, ModelSpec};
use stockrank::panel::{Imputation, Panel};
use stockrank::selection::{LabelledBlock, Learner};
use stockrank::synth::{generate_panel, SynthConfig};
use stockrank::target::TargetMode;

pub const TWO_REGIME_SIGMA: f64 = 0.001;
pub const TWO_REGIME_COEF: [f64; 5] = [1.0, -0.8, 0.6, -0.4, 0.2];

/// Train-row blocks of the means-only recipe, one per period.
pub fn train_blocks(panel: &Panel) -> Vec<LabelledBlock> {
    let panel = if panel.is_complete() { panel.clone() } else { panel.impute(Imputation::Zero).unwrap() };
    panel
        .periods()
        .iter()
        .map(|p| {
            let x = build_period_features(p, panel.schema(), &FeatureRecipe::means_only(), &[]).unwrap();
            let rows: Vec<usize> = (0..p.observations.len()).filter(|&i| p.observations[i].is_train).collect();
            let y = rows.iter().map(|&i| p.observations[i].target.unwrap()).collect();
            LabelledBlock::new(p.id.ordinal, x.select_rows(&rows), y).unwrap()
        })
        .collect()
}

pub fn feature_names(blocks: &[LabelledBlock]) -> Vec<String> {
    blocks[0].x.names().to_vec()
}

/// Eight training periods alternating between a coefficient vector and its
/// negation, plus a ninth validation period aligned with the first regime.
/// `two_regimes = false` keeps every period in the first regime.
pub fn two_regime_blocks(seed: u64, sigma: f64, two_regimes: bool) -> (Vec<LabelledBlock>, LabelledBlock) {
    let mut c = SynthConfig::noiseless(9, 100, TWO_REGIME_COEF.to_vec(), seed);
    c.noise_sigma = sigma;
    c.true_coefficients.push(TWO_REGIME_COEF.iter().map(|v| -v).collect());
    c.regime_of_period = Some(if two_regimes { vec![0, 1, 0, 1, 0, 1, 0, 1, 0] } else { vec![0; 9] });
    let (panel, _) = generate_panel(&c).unwrap();
    let mut blocks = train_blocks(&panel);
    let validation = blocks.pop().unwrap();
    (blocks, validation)
}

pub fn ols() -> Learner {
    Learner::new(ModelSpec::new(ModelKind::Ols, true), TargetMode::Raw)
}

pub fn ols_spearman(blocks: &[LabelledBlock], validation: &LabelledBlock) -> f64 {
    ols().fit_and_score(blocks, &feature_names(blocks), std::slice::from_ref(validation), MetricKind::Spearman).unwrap()
}
