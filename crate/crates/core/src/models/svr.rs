use super::Solution;

/// `C·Σ max(0, |y_i - x_iᵀw - b| - ε) + ½‖w‖²`
pub(crate) fn objective(rows: &[Vec<f64>], y: &[f64], w: &[f64], b: f64, c: f64, epsilon: f64) -> f64 {
    let loss: f64 = rows
        .iter()
        .zip(y)
        .map(|(x, t)| {
            let r = t - b - x.iter().zip(w).map(|(a, c)| a * c).sum::<f64>();
            (r.abs() - epsilon).max(0.0)
        })
        .sum();
    c * loss + 0.5 * w.iter().map(|v| v * v).sum::<f64>()
}

/// Cyclic per-sample subgradient descent in fixed row order. Epoch `t`
/// (0-based) uses step `eta0 / (1 + t)`; each sample's step carries `1/n` of
/// the regulariser. An epoch that ends with a higher objective than it
/// started with is rolled back, so the accepted objective never increases.
pub(crate) fn fit(
    cols: &[&[f64]],
    y: &[f64],
    c: f64,
    epsilon: f64,
    epochs: usize,
    eta0: f64,
    fit_intercept: bool,
) -> Solution {
    let n = y.len();
    let d = cols.len();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| cols.iter().map(|col| col[i]).collect()).collect();
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut current = objective(&rows, y, &w, b, c, epsilon);
    let mut trace = Vec::with_capacity(epochs);
    let inv_n = 1.0 / n as f64;
    for epoch in 0..epochs {
        let eta = eta0 / (1.0 + epoch as f64);
        let mut cw = w.clone();
        let mut cb = b;
        for (x, t) in rows.iter().zip(y) {
            let r = t - cb - x.iter().zip(&cw).map(|(a, c)| a * c).sum::<f64>();
            let g = if r > epsilon {
                -1.0
            } else if r < -epsilon {
                1.0
            } else {
                0.0
            };
            for (wj, xj) in cw.iter_mut().zip(x) {
                *wj -= eta * (*wj * inv_n + c * g * xj);
            }
            if fit_intercept {
                cb -= eta * c * g;
            }
        }
        let obj = objective(&rows, y, &cw, cb, c, epsilon);
        if obj.is_finite() && obj <= current {
            w = cw;
            b = cb;
            current = obj;
        }
        trace.push(current);
    }
    Solution { weights: w, intercept: b, iterations: epochs, covariance: None, objective_trace: trace }
}

#[cfg(test)]
mod tests {
    use crate::features::FeatureMatrix;
    use crate::models::{fit, ModelKind, ModelSpec};

    #[test]
    fn recovers_a_clean_slope() {
        let xs: Vec<f64> = (0..40).map(|i| f64::from(i) / 10.0 - 2.0).collect();
        let y: Vec<f64> = xs.iter().map(|x| 0.3 + 0.8 * x).collect();
        let x = FeatureMatrix::from_rows(&["x"], &xs.iter().map(|v| vec![*v]).collect::<Vec<_>>()).unwrap();
        let spec = ModelSpec::new(ModelKind::LinearSvr { c: 1.0, epsilon: 0.0, epochs: 200, eta0: 0.05 }, true);
        let m = fit(&x, &y, &spec).unwrap();
        assert!((m.weights[0] - 0.8).abs() < 0.1, "slope {}", m.weights[0]);
        let trace = &m.diagnostics.objective_trace;
        assert!(trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn identical_inputs_identical_weights() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![(i % 7) as f64, (i % 5) as f64 - 2.0]).collect();
        let y: Vec<f64> = rows.iter().map(|r| r[0] - r[1]).collect();
        let x = FeatureMatrix::from_rows(&["a", "b"], &rows).unwrap();
        let spec = ModelSpec::new(ModelKind::linear_svr(), true);
        let a = fit(&x, &y, &spec).unwrap();
        let b = fit(&x, &y, &spec).unwrap();
        assert_eq!(a.weights.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.weights.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }
}
