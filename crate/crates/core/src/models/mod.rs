//! Linear model zoo: OLS, ridge, Bayesian linear regression, Huber and
//! linear support vector regression.
//!
//! All models are fitted on column-major [`FeatureMatrix`] data. Intercepts
//! are never penalised: the penalised solvers work on centered data and
//! recover the intercept from the means.

mod huber;
mod least_squares;
mod svr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::FeatureMatrix;
use crate::linalg::{dot, LinalgError};

pub use least_squares::penalized_least_squares;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("singular normal equations: {0}")]
    SingularSystem(LinalgError),
    #[error("non-finite value during fitting: {0}")]
    NonFinite(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("column mismatch: {0}")]
    ColumnMismatch(String),
    #[error("invalid hyperparameter: {0}")]
    InvalidSpec(String),
}

impl From<LinalgError> for ModelError {
    fn from(e: LinalgError) -> Self {
        ModelError::SingularSystem(e)
    }
}

fn default_huber_delta() -> f64 {
    1.35
}
fn default_huber_iters() -> usize {
    100
}
fn default_huber_tol() -> f64 {
    1e-6
}
fn default_svr_c() -> f64 {
    1.0
}
fn default_svr_epsilon() -> f64 {
    0.1
}
fn default_svr_epochs() -> usize {
    50
}
fn default_svr_eta0() -> f64 {
    0.01
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelKind {
    Ols,
    Ridge {
        alpha: f64,
    },
    BayesLr {
        prior_precision: f64,
        noise_precision: f64,
    },
    Huber {
        #[serde(default = "default_huber_delta")]
        delta: f64,
        #[serde(default = "default_huber_iters")]
        max_iters: usize,
        #[serde(default = "default_huber_tol")]
        tol: f64,
    },
    /// Cyclic subgradient descent with step `eta0 / (1 + epoch)`.
    LinearSvr {
        #[serde(default = "default_svr_c")]
        c: f64,
        #[serde(default = "default_svr_epsilon")]
        epsilon: f64,
        #[serde(default = "default_svr_epochs")]
        epochs: usize,
        #[serde(default = "default_svr_eta0")]
        eta0: f64,
    },
}

impl ModelKind {
    pub fn huber() -> Self {
        ModelKind::Huber { delta: default_huber_delta(), max_iters: default_huber_iters(), tol: default_huber_tol() }
    }

    pub fn linear_svr() -> Self {
        ModelKind::LinearSvr {
            c: default_svr_c(),
            epsilon: default_svr_epsilon(),
            epochs: default_svr_epochs(),
            eta0: default_svr_eta0(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    #[serde(default = "default_true")]
    pub fit_intercept: bool,
    /// Fit on columns divided by their spread and map the weights back to
    /// the original scale. The spread is the standard deviation when an
    /// intercept is fitted and the root mean square otherwise.
    #[serde(default)]
    pub standardize: bool,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, fit_intercept: bool) -> Self {
        Self { kind, fit_intercept, standardize: false }
    }

    pub fn ridge(alpha: f64, fit_intercept: bool) -> Self {
        Self::new(ModelKind::Ridge { alpha }, fit_intercept)
    }

    pub fn with_standardize(mut self, on: bool) -> Self {
        self.standardize = on;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::InvalidSpec(m));
        match self.kind {
            ModelKind::Ols => Ok(()),
            ModelKind::Ridge { alpha } if !(alpha >= 0.0 && alpha.is_finite()) => bad(format!("ridge alpha {alpha}")),
            ModelKind::BayesLr { prior_precision, noise_precision }
                if !(prior_precision > 0.0 && noise_precision > 0.0) =>
            {
                bad(format!("bayes precisions {prior_precision}, {noise_precision}"))
            }
            ModelKind::Huber { delta, tol, .. } if !(delta > 0.0 && tol > 0.0) => bad(format!("huber delta {delta}")),
            ModelKind::LinearSvr { c, epsilon, eta0, .. } if !(c > 0.0 && epsilon >= 0.0 && eta0 > 0.0) => {
                bad(format!("svr c {c} epsilon {epsilon} eta0 {eta0}"))
            }
            _ => Ok(()),
        }
    }

    /// Short human-readable identifier used in reports.
    pub fn label(&self) -> String {
        let body = match self.kind {
            ModelKind::Ols => "ols".to_string(),
            ModelKind::Ridge { alpha } => format!("ridge(alpha={alpha})"),
            ModelKind::BayesLr { prior_precision, noise_precision } => {
                format!("bayes_lr(lambda={prior_precision},beta={noise_precision})")
            }
            ModelKind::Huber { delta, .. } => format!("huber(delta={delta})"),
            ModelKind::LinearSvr { c, epsilon, .. } => format!("linear_svr(c={c},epsilon={epsilon})"),
        };
        let mut s = body;
        if !self.fit_intercept {
            s.push_str("+no_intercept");
        }
        if self.standardize {
            s.push_str("+std");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// `‖y - Xw - b‖₂` on the training data.
    pub residual_norm: f64,
    pub iterations: usize,
    /// Bayesian posterior covariance of the weights (original scale).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub posterior_covariance: Option<Vec<Vec<f64>>>,
    /// Per-epoch objective of the support vector fit.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub objective_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedLinearModel {
    pub feature_names: Vec<String>,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub spec: ModelSpec,
    pub diagnostics: FitDiagnostics,
}

/// Raw solver output on (possibly rescaled) columns.
pub(crate) struct Solution {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub iterations: usize,
    pub covariance: Option<Vec<Vec<f64>>>,
    pub objective_trace: Vec<f64>,
}

pub fn fit(x: &FeatureMatrix, y: &[f64], spec: &ModelSpec) -> Result<TrainedLinearModel, ModelError> {
    spec.validate()?;
    let n = x.n_rows();
    if n == 0 || y.len() != n {
        return Err(ModelError::ShapeMismatch(format!("{n} rows vs {} targets", y.len())));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFinite("target".into()));
    }

    let scales: Vec<f64> = if spec.standardize {
        x.columns().iter().map(|c| spread(c, spec.fit_intercept)).collect()
    } else {
        vec![1.0; x.n_cols()]
    };
    let scaled: Vec<Vec<f64>>;
    let cols: Vec<&[f64]> = if spec.standardize {
        scaled = x
            .columns()
            .iter()
            .zip(&scales)
            .map(|(c, s)| c.iter().map(|v| v / s).collect())
            .collect();
        scaled.iter().map(Vec::as_slice).collect()
    } else {
        x.columns().iter().map(Vec::as_slice).collect()
    };

    let sol = match spec.kind {
        ModelKind::Ols => least_squares::solve(&cols, y, None, 1.0, 0.0, spec.fit_intercept, false)?,
        ModelKind::Ridge { alpha } => least_squares::solve(&cols, y, None, 1.0, alpha, spec.fit_intercept, false)?,
        ModelKind::BayesLr { prior_precision, noise_precision } => {
            least_squares::solve(&cols, y, None, noise_precision, prior_precision, spec.fit_intercept, true)?
        }
        ModelKind::Huber { delta, max_iters, tol } => huber::fit(&cols, y, delta, max_iters, tol, spec.fit_intercept)?,
        ModelKind::LinearSvr { c, epsilon, epochs, eta0 } => {
            svr::fit(&cols, y, c, epsilon, epochs, eta0, spec.fit_intercept)
        }
    };

    let weights: Vec<f64> = sol.weights.iter().zip(&scales).map(|(w, s)| w / s).collect();
    let covariance = sol.covariance.map(|cov| {
        cov.iter()
            .enumerate()
            .map(|(i, row)| row.iter().enumerate().map(|(j, v)| v / (scales[i] * scales[j])).collect())
            .collect()
    });
    if weights.iter().any(|w| !w.is_finite()) || !sol.intercept.is_finite() {
        return Err(ModelError::NonFinite("weights".into()));
    }
    let mut model = TrainedLinearModel {
        feature_names: x.names().to_vec(),
        weights,
        intercept: sol.intercept,
        spec: *spec,
        diagnostics: FitDiagnostics {
            residual_norm: 0.0,
            iterations: sol.iterations,
            posterior_covariance: covariance,
            objective_trace: sol.objective_trace,
        },
    };
    let pred = model.predict_columns(x.columns());
    model.diagnostics.residual_norm = pred.iter().zip(y).map(|(p, t)| (t - p) * (t - p)).sum::<f64>().sqrt();
    Ok(model)
}

fn spread(col: &[f64], centered: bool) -> f64 {
    let n = col.len() as f64;
    let m = if centered { col.iter().sum::<f64>() / n } else { 0.0 };
    let s = (col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt();
    if s > 0.0 && s.is_finite() {
        s
    } else {
        1.0
    }
}

impl TrainedLinearModel {
    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<f64>, ModelError> {
        if x.names() != self.feature_names.as_slice() {
            return Err(ModelError::ColumnMismatch(format!(
                "model expects {} columns {:?}..., got {} columns",
                self.feature_names.len(),
                self.feature_names.first(),
                x.n_cols()
            )));
        }
        Ok(self.predict_columns(x.columns()))
    }

    fn predict_columns(&self, cols: &[Vec<f64>]) -> Vec<f64> {
        let n = cols.first().map_or(0, Vec::len);
        let mut out = vec![self.intercept; n];
        for (c, w) in cols.iter().zip(&self.weights) {
            for (o, v) in out.iter_mut().zip(c) {
                *o += w * v;
            }
        }
        out
    }

    /// Bayesian predictive variance `1/β + xᵀΣx` per row; `None` for other
    /// model kinds.
    pub fn predictive_variance(&self, x: &FeatureMatrix) -> Option<Vec<f64>> {
        let ModelKind::BayesLr { noise_precision, .. } = self.spec.kind else {
            return None;
        };
        let cov = self.diagnostics.posterior_covariance.as_ref()?;
        Some(
            (0..x.n_rows())
                .map(|i| {
                    let row = x.row(i);
                    let sx: Vec<f64> = cov.iter().map(|r| dot(r, &row)).collect();
                    1.0 / noise_precision + dot(&row, &sx)
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn col(xs: &[f64]) -> FeatureMatrix {
        FeatureMatrix::from_rows(&["x"], &xs.iter().map(|v| vec![*v]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn ridge_examples() {
        let x = col(&[1.0, 2.0]);
        let m = fit(&x, &[1.0, 2.0], &ModelSpec::ridge(0.0, false)).unwrap();
        assert_abs_diff_eq!(m.weights[0], 1.0, epsilon = 1e-14);
        let m = fit(&x, &[1.0, 2.0], &ModelSpec::ridge(3.0, false)).unwrap();
        assert_abs_diff_eq!(m.weights[0], 5.0 / 8.0, epsilon = 1e-14);
        assert_eq!(m.intercept, 0.0);
        let bayes = ModelSpec::new(ModelKind::BayesLr { prior_precision: 3.0, noise_precision: 1.0 }, false);
        let b = fit(&x, &[1.0, 2.0], &bayes).unwrap();
        assert_abs_diff_eq!(b.weights[0], 5.0 / 8.0, epsilon = 1e-14);
        let cov = b.diagnostics.posterior_covariance.as_ref().unwrap();
        assert_abs_diff_eq!(cov[0][0], 1.0 / 8.0, epsilon = 1e-14);
        let var = b.predictive_variance(&col(&[2.0])).unwrap();
        assert_abs_diff_eq!(var[0], 1.0 + 4.0 / 8.0, epsilon = 1e-14);
    }

    #[test]
    fn predict_examples() {
        let x = col(&[1.0, 2.0]);
        let m = fit(&x, &[1.0, 2.0], &ModelSpec::ridge(0.0, false)).unwrap();
        assert_abs_diff_eq!(m.predict(&col(&[3.0])).unwrap()[0], 3.0, epsilon = 1e-14);
        let zero = TrainedLinearModel { weights: vec![0.0], intercept: 0.25, ..m.clone() };
        assert_eq!(zero.predict(&col(&[1.0, 9.0])).unwrap(), vec![0.25, 0.25]);
        let other = FeatureMatrix::from_rows(&["z"], &[vec![1.0]]).unwrap();
        assert!(matches!(m.predict(&other), Err(ModelError::ColumnMismatch(_))));
    }

    #[test]
    fn perfect_fit_reproduces_targets() {
        let rows = vec![vec![1.0, 0.5], vec![2.0, -1.0], vec![0.0, 3.0], vec![4.0, 1.0]];
        let x = FeatureMatrix::from_rows(&["a", "b"], &rows).unwrap();
        let y: Vec<f64> = rows.iter().map(|r| 0.5 + 2.0 * r[0] - r[1]).collect();
        for spec in [ModelSpec::new(ModelKind::Ols, true), ModelSpec::new(ModelKind::Ols, true).with_standardize(true)] {
            let m = fit(&x, &y, &spec).unwrap();
            for (p, t) in m.predict(&x).unwrap().iter().zip(&y) {
                assert_abs_diff_eq!(p, t, epsilon = 1e-10);
            }
            assert_abs_diff_eq!(m.intercept, 0.5, epsilon = 1e-10);
            assert!(m.diagnostics.residual_norm < 1e-10);
        }
    }

    #[test]
    fn error_paths() {
        let dup = FeatureMatrix::from_rows(&["a", "b"], &[vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]]).unwrap();
        assert!(matches!(
            fit(&dup, &[1.0, 2.0, 3.0], &ModelSpec::new(ModelKind::Ols, false)),
            Err(ModelError::SingularSystem(_))
        ));
        let x = col(&[1.0, 2.0]);
        assert!(matches!(fit(&x, &[1.0], &ModelSpec::ridge(1.0, true)), Err(ModelError::ShapeMismatch(_))));
        assert!(matches!(fit(&x, &[1.0, 2.0], &ModelSpec::ridge(-1.0, true)), Err(ModelError::InvalidSpec(_))));
        assert!(matches!(fit(&x, &[1.0, f64::NAN], &ModelSpec::ridge(1.0, true)), Err(ModelError::NonFinite(_))));
    }

    #[test]
    fn spec_json_defaults() {
        let s: ModelSpec = serde_json::from_str(r#"{"kind":{"type":"huber"}}"#).unwrap();
        assert_eq!(s, ModelSpec::new(ModelKind::huber(), true));
        let s: ModelSpec = serde_json::from_str(r#"{"kind":{"type":"ridge","alpha":850},"fit_intercept":false}"#).unwrap();
        assert_eq!(s.label(), "ridge(alpha=850)+no_intercept");
        assert!(serde_json::from_str::<ModelSpec>(r#"{"kind":{"type":"ols"},"bogus":1}"#).is_err());
    }

    #[test]
    fn trained_model_json_round_trip() {
        let x = col(&[1.0, 2.0, 4.0]);
        let m = fit(&x, &[1.0, 2.0, 3.0], &ModelSpec::new(ModelKind::linear_svr(), true)).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let back: TrainedLinearModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
