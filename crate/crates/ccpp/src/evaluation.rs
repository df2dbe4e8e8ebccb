//! Testing-phase analytics: loss metrics, error statistics, error
//! histograms, worst samples, and perturbation-based input importance.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{stats_of, Histogram};
use crate::network::{NetworkError, NetworkModel};

#[derive(Debug, Error)]
pub enum EvaluationError {
    #[error("evaluation needs at least one row")]
    EmptyRows,
    #[error("evaluation needs at least two rows")]
    TooFewRows,
    #[error("targets are constant; normalized error undefined")]
    ConstantTargets,
    #[error("relative error undefined: target is zero at row {0}")]
    ZeroTarget(usize),
    #[error("k must be at least 1")]
    BadK,
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// The five loss metrics over one set of rows.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ErrorMetrics {
    pub sse: f64,
    pub mse: f64,
    pub rmse: f64,
    pub nse: f64,
    pub minkowski: f64,
}

/// min/max/mean/deviation of one error family.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ErrorSpread {
    pub minimum: f64,
    pub maximum: f64,
    pub mean: f64,
    pub deviation: f64,
}

/// Absolute, relative, and percentage error statistics.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ErrorStatistics {
    pub absolute: ErrorSpread,
    pub relative: ErrorSpread,
    pub percentage: ErrorSpread,
    /// Rows excluded from the relative/percentage families because their
    /// target is exactly zero.
    pub zero_target_rows: usize,
}

/// Full per-split evaluation bundle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorReport {
    pub split: String,
    pub metrics: ErrorMetrics,
    pub statistics: ErrorStatistics,
    pub r_squared: f64,
    pub histogram: Histogram,
    pub maximal_errors: Vec<(usize, f64)>,
}

fn predictions(
    model: &NetworkModel,
    rows: &[(Vec<f64>, f64)],
) -> Result<Vec<f64>, EvaluationError> {
    rows.iter()
        .map(|(x, _)| model.forward(x).map_err(EvaluationError::from))
        .collect()
}

/// sse, mse, rmse, nse, and the Minkowski error `sum(|e|^q)`.
pub fn error_metrics(
    model: &NetworkModel,
    rows: &[(Vec<f64>, f64)],
    minkowski_exponent: f64,
) -> Result<ErrorMetrics, EvaluationError> {
    if rows.is_empty() {
        return Err(EvaluationError::EmptyRows);
    }
    let preds = predictions(model, rows)?;
    let n = rows.len() as f64;
    let y_mean = rows.iter().map(|(_, y)| *y).sum::<f64>() / n;
    let denom: f64 = rows.iter().map(|(_, y)| (y - y_mean) * (y - y_mean)).sum();
    let mut sse = 0.0;
    let mut minkowski = 0.0;
    for (p, (_, y)) in preds.iter().zip(rows) {
        let e = p - y;
        sse += e * e;
        minkowski += e.abs().powf(minkowski_exponent);
    }
    let mse = sse / n;
    let nse = if denom == 0.0 {
        return Err(EvaluationError::ConstantTargets);
    } else {
        sse / denom
    };
    Ok(ErrorMetrics { sse, mse, rmse: mse.sqrt(), nse, minkowski })
}

/// Coefficient of determination, computed as `1 - nse` so the two always
/// share a denominator bit-for-bit.
pub fn r_squared(predictions: &[f64], targets: &[f64]) -> Result<f64, EvaluationError> {
    if predictions.len() != targets.len() || predictions.len() < 2 {
        return Err(EvaluationError::TooFewRows);
    }
    let n = targets.len() as f64;
    let y_mean = targets.iter().sum::<f64>() / n;
    let denom: f64 = targets.iter().map(|y| (y - y_mean) * (y - y_mean)).sum();
    if denom == 0.0 {
        return Err(EvaluationError::ConstantTargets);
    }
    let sse: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(p, y)| (p - y) * (p - y))
        .sum();
    Ok(1.0 - sse / denom)
}

/// Model-level R^2 over rows.
pub fn r_squared_of(model: &NetworkModel, rows: &[(Vec<f64>, f64)]) -> Result<f64, EvaluationError> {
    let preds = predictions(model, rows)?;
    let targets: Vec<f64> = rows.iter().map(|(_, y)| *y).collect();
    r_squared(&preds, &targets)
}

fn spread_of(values: &[f64]) -> ErrorSpread {
    let s = stats_of(values);
    ErrorSpread { minimum: s.minimum, maximum: s.maximum, mean: s.mean, deviation: s.deviation }
}

/// Absolute, relative, and percentage error statistics. Rows whose target is
/// exactly zero are excluded from the relative families and counted.
pub fn error_statistics(
    model: &NetworkModel,
    rows: &[(Vec<f64>, f64)],
) -> Result<ErrorStatistics, EvaluationError> {
    if rows.is_empty() {
        return Err(EvaluationError::EmptyRows);
    }
    let preds = predictions(model, rows)?;
    let absolute: Vec<f64> = preds.iter().zip(rows).map(|(p, (_, y))| (p - y).abs()).collect();
    let mut relative = Vec::with_capacity(rows.len());
    let mut percentage = Vec::with_capacity(rows.len());
    let mut zero_target_rows = 0usize;
    for (abs_e, (_, y)) in absolute.iter().zip(rows) {
        if *y == 0.0 {
            zero_target_rows += 1;
            continue;
        }
        let rel = abs_e / y.abs();
        relative.push(rel);
        percentage.push(100.0 * rel);
    }
    if relative.is_empty() {
        return Err(EvaluationError::ZeroTarget(0));
    }
    Ok(ErrorStatistics {
        absolute: spread_of(&absolute),
        relative: spread_of(&relative),
        percentage: spread_of(&percentage),
        zero_target_rows,
    })
}

/// Top-k absolute errors with their row indices, descending; k is clamped to
/// the row count. Ties keep the lower index first, so extending k never
/// reorders an existing prefix.
pub fn maximal_errors(
    model: &NetworkModel,
    rows: &[(Vec<f64>, f64)],
    k: usize,
) -> Result<Vec<(usize, f64)>, EvaluationError> {
    if k < 1 {
        return Err(EvaluationError::BadK);
    }
    if rows.is_empty() {
        return Err(EvaluationError::EmptyRows);
    }
    let preds = predictions(model, rows)?;
    let mut errors: Vec<(usize, f64)> = preds
        .iter()
        .zip(rows)
        .enumerate()
        .map(|(i, (p, (_, y)))| (i, (p - y).abs()))
        .collect();
    errors.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    errors.truncate(k);
    Ok(errors)
}

/// Signed one-standard-deviation perturbation importance per input:
/// mean over rows of `[f(x with x_j += sigma_j) - f(x)] / sigma_target`.
pub fn input_importance(
    model: &NetworkModel,
    rows: &[(Vec<f64>, f64)],
) -> Result<Vec<f64>, EvaluationError> {
    if rows.is_empty() {
        return Err(EvaluationError::EmptyRows);
    }
    let n_inputs = model.n_inputs();
    let targets: Vec<f64> = rows.iter().map(|(_, y)| *y).collect();
    let sigma_target = stats_of(&targets).deviation;
    if sigma_target == 0.0 {
        return Err(EvaluationError::ConstantTargets);
    }
    let mut scores = Vec::with_capacity(n_inputs);
    for j in 0..n_inputs {
        let column: Vec<f64> = rows.iter().map(|(x, _)| x[j]).collect();
        let sigma_j = stats_of(&column).deviation;
        let mut acc = 0.0;
        let mut perturbed = Vec::new();
        for (x, _) in rows {
            perturbed.clear();
            perturbed.extend_from_slice(x);
            perturbed[j] += sigma_j;
            acc += (model.forward(&perturbed)? - model.forward(x)?) / sigma_target;
        }
        scores.push(acc / rows.len() as f64);
    }
    Ok(scores)
}

/// Error histogram of signed residuals, for the error-distribution report.
pub fn error_histogram(
    model: &NetworkModel,
    rows: &[(Vec<f64>, f64)],
    bin_count: usize,
) -> Result<Histogram, EvaluationError> {
    if rows.is_empty() {
        return Err(EvaluationError::EmptyRows);
    }
    let preds = predictions(model, rows)?;
    let residuals: Vec<f64> = preds.iter().zip(rows).map(|(p, (_, y))| p - y).collect();
    let columns = vec![crate::dataset::ColumnSpec::new("error", crate::dataset::Role::Input, "")];
    let ds = crate::dataset::Dataset::from_rows(columns, residuals.into_iter().map(|e| vec![e]).collect());
    crate::dataset::histogram(&ds, "error", bin_count).map_err(|_| EvaluationError::EmptyRows)
}

/// Assembles the full report for one split.
pub fn error_report(
    model: &NetworkModel,
    rows: &[(Vec<f64>, f64)],
    split: &str,
    minkowski_exponent: f64,
    max_error_samples: usize,
    histogram_bins: usize,
) -> Result<ErrorReport, EvaluationError> {
    let metrics = error_metrics(model, rows, minkowski_exponent)?;
    let statistics = error_statistics(model, rows)?;
    let preds = predictions(model, rows)?;
    let targets: Vec<f64> = rows.iter().map(|(_, y)| *y).collect();
    let r2 = r_squared(&preds, &targets)?;
    let histogram = error_histogram(model, rows, histogram_bins)?;
    let maximal = maximal_errors(model, rows, max_error_samples)?;
    Ok(ErrorReport {
        split: split.to_string(),
        metrics,
        statistics,
        r_squared: r2,
        histogram,
        maximal_errors: maximal,
    })
}
