//! Pearson, Spearman, and transform-family ("maximal") correlations,
//! pairwise matrices with 95% confidence intervals, and the percentage
//! difference between correlation methods.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, Role};

#[derive(Debug, Error)]
pub enum CorrelationError {
    #[error("inputs must have equal length >= 2 (got {0} and {1})")]
    LengthMismatch(usize, usize),
    #[error("correlation is undefined for a constant column")]
    ConstantColumn,
    #[error("no regression form admits this data (domain violations everywhere)")]
    NoAdmissibleForm,
    #[error("confidence interval undefined for |r| = 1")]
    DegenerateR,
    #[error("confidence interval needs at least 4 samples, got {0}")]
    TooFewSamples(usize),
    #[error("matrix needs at least 2 non-constant columns")]
    TooFewColumns,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMethod {
    Pearson,
    Spearman,
    Maximal,
}

impl std::str::FromStr for CorrelationMethod {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pearson" => Ok(CorrelationMethod::Pearson),
            "spearman" => Ok(CorrelationMethod::Spearman),
            "maximal" => Ok(CorrelationMethod::Maximal),
            other => Err(format!("unknown correlation method {other:?}")),
        }
    }
}

/// Regression form attaining the strongest correlation in the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressionForm {
    Linear,
    Logarithmic,
    Exponential,
    Power,
}

/// One pair in a correlation report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationPair {
    pub col_a: String,
    pub col_b: String,
    pub r: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Pairs under the minimum-correlation presumption (|r| < 0.25) are
    /// reported but flagged rather than dropped.
    pub low_confidence: bool,
}

/// Pairwise correlations: matrix with unit diagonal plus pairs sorted by |r|.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub method: CorrelationMethod,
    pub columns: Vec<String>,
    pub pairs: Vec<CorrelationPair>,
    pub matrix: Vec<Vec<f64>>,
}

/// |r| threshold below which a pair is flagged low-confidence.
pub const MIN_CORRELATION: f64 = 0.25;

fn check_pair(x: &[f64], y: &[f64]) -> Result<(), CorrelationError> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(CorrelationError::LengthMismatch(x.len(), y.len()));
    }
    Ok(())
}

/// Pearson product-moment correlation, clamped to [-1, 1].
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, CorrelationError> {
    check_pair(x, y)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(CorrelationError::ConstantColumn);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Ranks with ties averaged (1-based).
pub(crate) fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // rank positions i..=j share the same value; assign their mean rank
        let mean_rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = mean_rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation: Pearson on average-ranked data.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, CorrelationError> {
    check_pair(x, y)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Closed-form Spearman for tie-free data: 1 - 6*sum(d^2)/(n(n^2-1)).
/// Kept as the algebraic second route; agrees with [`spearman`] when no
/// value repeats.
pub fn spearman_closed_form(x: &[f64], y: &[f64]) -> Result<f64, CorrelationError> {
    check_pair(x, y)?;
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let n = x.len() as f64;
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(1.0 - 6.0 * d2 / (n * (n * n - 1.0)))
}

/// Evaluates Pearson under the regression-form family
/// {linear (x, y), logarithmic (ln x, y), exponential (x, ln y),
/// power (ln x, ln y)} and returns the member with the largest |r|.
/// Forms whose domain the data violates are skipped.
pub fn maximal_correlation(x: &[f64], y: &[f64]) -> Result<(f64, RegressionForm), CorrelationError> {
    check_pair(x, y)?;
    let x_pos = x.iter().all(|&v| v > 0.0);
    let y_pos = y.iter().all(|&v| v > 0.0);
    let ln = |v: &[f64]| v.iter().map(|a| a.ln()).collect::<Vec<f64>>();

    let mut best: Option<(f64, RegressionForm)> = None;
    let mut consider = |r: Result<f64, CorrelationError>, form: RegressionForm| {
        if let Ok(r) = r {
            if best.map_or(true, |(b, _)| r.abs() > b.abs()) {
                best = Some((r, form));
            }
        }
    };
    consider(pearson(x, y), RegressionForm::Linear);
    if x_pos {
        consider(pearson(&ln(x), y), RegressionForm::Logarithmic);
    }
    if y_pos {
        consider(pearson(x, &ln(y)), RegressionForm::Exponential);
    }
    if x_pos && y_pos {
        consider(pearson(&ln(x), &ln(y)), RegressionForm::Power);
    }
    best.ok_or(CorrelationError::NoAdmissibleForm)
}

/// Fisher z-transform 95% confidence interval.
pub fn confidence_interval(r: f64, n: usize, level: f64) -> Result<(f64, f64), CorrelationError> {
    if r.abs() >= 1.0 {
        return Err(CorrelationError::DegenerateR);
    }
    if n < 4 {
        return Err(CorrelationError::TooFewSamples(n));
    }
    // 1.959964 is the two-sided 95% normal quantile; other levels unsupported
    assert!((level - 0.95).abs() < 1e-12, "only the 95% level is implemented");
    let z = r.atanh();
    let half_width = 1.959964 / ((n - 3) as f64).sqrt();
    Ok(((z - half_width).tanh(), (z + half_width).tanh()))
}

/// Percentage difference between two correlations, as used to compare the
/// transform-family and Spearman matrices: 100 * | |a| - |b| |.
pub fn percentage_difference(a: f64, b: f64) -> f64 {
    100.0 * (a.abs() - b.abs()).abs()
}

fn pair_value(
    method: CorrelationMethod,
    x: &[f64],
    y: &[f64],
) -> Result<f64, CorrelationError> {
    match method {
        CorrelationMethod::Pearson => pearson(x, y),
        CorrelationMethod::Spearman => spearman(x, y),
        CorrelationMethod::Maximal => maximal_correlation(x, y).map(|(r, _)| r),
    }
}

/// All pairwise correlations among non-unused columns.
///
/// The matrix has an exactly-unit diagonal and is symmetric by construction;
/// the pair list is sorted by descending |r| for top-k views.
pub fn correlation_matrix(
    ds: &Dataset,
    method: CorrelationMethod,
) -> Result<CorrelationReport, CorrelationError> {
    let cols: Vec<usize> = ds
        .columns()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.role != Role::Unused)
        .map(|(i, _)| i)
        .collect();
    if cols.len() < 2 {
        return Err(CorrelationError::TooFewColumns);
    }
    let names: Vec<String> = cols.iter().map(|&i| ds.columns()[i].name.clone()).collect();
    let series: Vec<Vec<f64>> = cols.iter().map(|&i| ds.column_values(i)).collect();
    let n = ds.n_rows();

    let k = cols.len();
    let mut matrix = vec![vec![0.0; k]; k];
    let mut pairs = Vec::new();
    for i in 0..k {
        matrix[i][i] = 1.0;
        for j in (i + 1)..k {
            let r = pair_value(method, &series[i], &series[j])?;
            matrix[i][j] = r;
            matrix[j][i] = r;
            let (ci_low, ci_high) = if r.abs() < 1.0 && n >= 4 {
                confidence_interval(r, n, 0.95)?
            } else {
                (r, r)
            };
            pairs.push(CorrelationPair {
                col_a: names[i].clone(),
                col_b: names[j].clone(),
                r,
                ci_low,
                ci_high,
                low_confidence: r.abs() < MIN_CORRELATION,
            });
        }
    }
    pairs.sort_by(|a, b| b.r.abs().partial_cmp(&a.r.abs()).unwrap());
    Ok(CorrelationReport { method, columns: names, pairs, matrix })
}

/// Correlation of every input column with the target column.
pub fn input_target_correlations(
    ds: &Dataset,
    method: CorrelationMethod,
) -> Result<Vec<(String, f64)>, CorrelationError> {
    let target = ds.target_index().ok_or(CorrelationError::TooFewColumns)?;
    let ty = ds.column_values(target);
    ds.input_indices()
        .into_iter()
        .map(|i| {
            let r = pair_value(method, &ds.column_values(i), &ty)?;
            Ok((ds.columns()[i].name.clone(), r))
        })
        .collect()
}
