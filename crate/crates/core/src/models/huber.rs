use super::{least_squares::penalized_least_squares, ModelError, Solution};

/// Iteratively reweighted least squares on the Huber loss. Starts from the
/// least-squares solution; row weights are `1` inside `delta` and
/// `delta / |r|` outside. Stops when no coefficient moves by `tol` or more.
pub(crate) fn fit(
    cols: &[&[f64]],
    y: &[f64],
    delta: f64,
    max_iters: usize,
    tol: f64,
    fit_intercept: bool,
) -> Result<Solution, ModelError> {
    let (mut w, mut b) = penalized_least_squares(cols, y, None, 0.0, fit_intercept)?;
    let n = y.len();
    let mut iterations = 0;
    let mut rw = vec![1.0; n];
    while iterations < max_iters {
        iterations += 1;
        let mut pred = vec![b; n];
        for (c, wj) in cols.iter().zip(&w) {
            for (p, v) in pred.iter_mut().zip(c.iter()) {
                *p += wj * v;
            }
        }
        for ((r, p), t) in rw.iter_mut().zip(&pred).zip(y) {
            let res = (t - p).abs();
            *r = if res <= delta { 1.0 } else { delta / res };
        }
        let (nw, nb) = penalized_least_squares(cols, y, Some(&rw), 0.0, fit_intercept)?;
        if nw.iter().chain([&nb]).any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite("huber iteration".into()));
        }
        let change = nw
            .iter()
            .zip(&w)
            .map(|(a, c)| (a - c).abs())
            .chain([(nb - b).abs()])
            .fold(0.0, f64::max);
        w = nw;
        b = nb;
        if change < tol {
            break;
        }
    }
    Ok(Solution { weights: w, intercept: b, iterations, covariance: None, objective_trace: Vec::new() })
}
