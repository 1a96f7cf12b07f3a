use super::{ModelError, Solution};
use crate::linalg::{dot, gram, Cholesky};

const PIVOT_TOLERANCE: f64 = 1e-11;

/// Solves `(s·CᵀWC + λI) w = s·CᵀW(y - ȳ)` on (weighted-)centered columns
/// when an intercept is fitted, or on raw columns otherwise.
pub(crate) fn solve(
    cols: &[&[f64]],
    y: &[f64],
    weights: Option<&[f64]>,
    data_scale: f64,
    lambda: f64,
    fit_intercept: bool,
    want_covariance: bool,
) -> Result<Solution, ModelError> {
    let (w, b, ch) = factor_and_solve(cols, y, weights, data_scale, lambda, fit_intercept)?;
    let covariance = want_covariance.then(|| ch.inverse().to_rows());
    Ok(Solution { weights: w, intercept: b, iterations: 1, covariance, objective_trace: Vec::new() })
}

fn factor_and_solve(
    cols: &[&[f64]],
    y: &[f64],
    weights: Option<&[f64]>,
    data_scale: f64,
    lambda: f64,
    fit_intercept: bool,
) -> Result<(Vec<f64>, f64, Cholesky), ModelError> {
    let n = y.len();
    let wsum = weights.map_or(n as f64, |w| w.iter().sum());
    let wmean = |v: &[f64]| -> f64 {
        match weights {
            Some(w) => dot(v, w) / wsum,
            None => v.iter().sum::<f64>() / n as f64,
        }
    };
    let (x_means, y_mean) = if fit_intercept {
        (cols.iter().map(|c| wmean(c)).collect::<Vec<_>>(), wmean(y))
    } else {
        (vec![0.0; cols.len()], 0.0)
    };
    let centered: Vec<Vec<f64>> = cols
        .iter()
        .zip(&x_means)
        .map(|(c, m)| c.iter().map(|v| v - m).collect())
        .collect();
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();

    let mut a = gram(&centered, weights);
    let mut rhs: Vec<f64> = match weights {
        Some(w) => {
            let wy: Vec<f64> = yc.iter().zip(w).map(|(a, b)| a * b).collect();
            centered.iter().map(|c| dot(c, &wy)).collect()
        }
        None => centered.iter().map(|c| dot(c, &yc)).collect(),
    };
    if data_scale != 1.0 {
        a.scale(data_scale);
        rhs.iter_mut().for_each(|v| *v *= data_scale);
    }
    a.add_diagonal(lambda);
    let ch = Cholesky::new(&a, PIVOT_TOLERANCE)?;
    let w = ch.solve(&rhs);
    let b = if fit_intercept { y_mean - dot(&w, &x_means) } else { 0.0 };
    Ok((w, b, ch))
}

/// Weighted ridge solve exposed for callers that manage their own weights.
/// Returns `(weights, intercept)`.
pub fn penalized_least_squares(
    cols: &[&[f64]],
    y: &[f64],
    row_weights: Option<&[f64]>,
    alpha: f64,
    fit_intercept: bool,
) -> Result<(Vec<f64>, f64), ModelError> {
    let (w, b, _) = factor_and_solve(cols, y, row_weights, 1.0, alpha, fit_intercept)?;
    Ok((w, b))
}
