use serde::{Deserialize, Serialize};

use super::{FeatureError, FeatureMatrix};
use crate::linalg::{gram, jacobi_eigen};

const SIGN_TOLERANCE: f64 = 1e-12;

/// Principal components of a centered (unscaled) feature matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub columns: Vec<String>,
    pub means: Vec<f64>,
    /// Unit loading vectors of the retained components, strongest first.
    pub loadings: Vec<Vec<f64>>,
    /// All eigenvalues of the sample covariance, descending.
    pub eigenvalues: Vec<f64>,
    /// Explained-variance fraction of every component.
    pub explained: Vec<f64>,
    pub k: usize,
}

pub fn pca_fit(x: &FeatureMatrix, variance_threshold: f64) -> Result<PcaModel, FeatureError> {
    if !(variance_threshold > 0.0 && variance_threshold <= 1.0) {
        return Err(FeatureError::InvalidRecipe(format!("pca threshold {variance_threshold} outside (0, 1]")));
    }
    let n = x.n_rows();
    if n < 2 {
        return Err(FeatureError::TooFewRows(n));
    }
    let means: Vec<f64> = x.columns().iter().map(|c| c.iter().sum::<f64>() / n as f64).collect();
    let centered: Vec<Vec<f64>> = x
        .columns()
        .iter()
        .zip(&means)
        .map(|(c, m)| c.iter().map(|v| v - m).collect())
        .collect();
    let mut cov = gram(&centered, None);
    cov.scale(1.0 / (n - 1) as f64);
    let eig = jacobi_eigen(&cov)?;
    let total: f64 = eig.values.iter().map(|v| v.max(0.0)).sum();
    if !(total > 0.0) {
        return Err(FeatureError::DegenerateInput);
    }
    let explained: Vec<f64> = eig.values.iter().map(|v| v.max(0.0) / total).collect();
    let mut cum = 0.0;
    let mut k = explained.len();
    for (i, f) in explained.iter().enumerate() {
        cum += f;
        if cum >= variance_threshold - 1e-12 {
            k = i + 1;
            break;
        }
    }
    let loadings = eig.vectors[..k].iter().map(|v| orient(v.clone())).collect();
    Ok(PcaModel {
        columns: x.names().to_vec(),
        means,
        loadings,
        eigenvalues: eig.values,
        explained,
        k,
    })
}

/// Flips a vector so its first clearly nonzero entry is positive.
pub fn orient(mut v: Vec<f64>) -> Vec<f64> {
    if let Some(first) = v.iter().find(|x| x.abs() > SIGN_TOLERANCE) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    v
}

/// Scores `pc_1..pc_k` of `x` under `model`.
pub fn pca_transform(model: &PcaModel, x: &FeatureMatrix) -> Result<FeatureMatrix, FeatureError> {
    let cols: Vec<&[f64]> = model
        .columns
        .iter()
        .map(|c| x.column(c).ok_or_else(|| FeatureError::ColumnMismatch(format!("missing fitted column {c}"))))
        .collect::<Result<_, _>>()?;
    let mut out = FeatureMatrix::empty(x.row_ids().to_vec());
    for (j, load) in model.loadings.iter().enumerate() {
        let scores = (0..x.n_rows())
            .map(|i| {
                cols.iter()
                    .zip(&model.means)
                    .zip(load)
                    .map(|((c, m), l)| (c[i] - m) * l)
                    .sum()
            })
            .collect();
        out.push_column(format!("pc_{}", j + 1), scores)?;
    }
    Ok(out)
}
