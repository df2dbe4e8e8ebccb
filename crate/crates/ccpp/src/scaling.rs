//! Per-column scalers and their exact inverses.
//!
//! Four methods: none, min-max to [0, 1], mean/standard-deviation
//! standardization, and natural logarithm. Constants are fitted once and
//! frozen; `scale`/`unscale` are pure functions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleMethod {
    None,
    MinMax,
    MeanSd,
    Log,
}

impl std::str::FromStr for ScaleMethod {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(ScaleMethod::None),
            "min_max" | "minmax" | "min-max" => Ok(ScaleMethod::MinMax),
            "mean_sd" | "meansd" | "mean-sd" | "standard" => Ok(ScaleMethod::MeanSd),
            "log" => Ok(ScaleMethod::Log),
            other => Err(format!("unknown scaler {other:?}")),
        }
    }
}

#[derive(Debug, Error)]
pub enum ScalingError {
    #[error("cannot fit a scaler to an empty column")]
    EmptyInput,
    #[error("column is degenerate for this method (zero spread)")]
    DegenerateColumn,
    #[error("logarithmic scaling requires strictly positive values, got {0}")]
    NonPositive(f64),
    #[error("values must be finite")]
    NonFinite,
}

/// Fitted constants for one column. All four statistics are recorded no
/// matter which method is active; min/max double as the extrapolation check
/// for what-if queries.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScalerParams {
    pub method: ScaleMethod,
    pub minimum: f64,
    pub maximum: f64,
    pub mean: f64,
    pub deviation: f64,
}

impl ScalerParams {
    /// Identity scaler, used as a placeholder before fitting.
    pub fn identity() -> Self {
        ScalerParams {
            method: ScaleMethod::None,
            minimum: 0.0,
            maximum: 1.0,
            mean: 0.0,
            deviation: 1.0,
        }
    }

    /// Mean/deviation scaler from explicit constants.
    pub fn mean_sd(mean: f64, deviation: f64, minimum: f64, maximum: f64) -> Self {
        ScalerParams { method: ScaleMethod::MeanSd, minimum, maximum, mean, deviation }
    }
}

/// Fits the requested method to the values, recording min/max/mean/deviation.
pub fn fit(values: &[f64], method: ScaleMethod) -> Result<ScalerParams, ScalingError> {
    if values.is_empty() {
        return Err(ScalingError::EmptyInput);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(ScalingError::NonFinite);
    }
    let n = values.len() as f64;
    let mut minimum = f64::INFINITY;
    let mut maximum = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for &v in values {
        minimum = minimum.min(v);
        maximum = maximum.max(v);
        sum += v;
    }
    let mean = sum / n;
    let ss: f64 = values.iter().map(|&v| (v - mean) * (v - mean)).sum();
    let deviation = (ss / n).sqrt();

    match method {
        ScaleMethod::MinMax if maximum <= minimum => return Err(ScalingError::DegenerateColumn),
        ScaleMethod::MeanSd if deviation <= 0.0 => return Err(ScalingError::DegenerateColumn),
        ScaleMethod::Log => {
            if minimum <= 0.0 {
                return Err(ScalingError::NonPositive(minimum));
            }
        }
        _ => {}
    }
    Ok(ScalerParams { method, minimum, maximum, mean, deviation })
}

pub fn scale(x: f64, p: &ScalerParams) -> Result<f64, ScalingError> {
    Ok(match p.method {
        ScaleMethod::None => x,
        ScaleMethod::MinMax => (x - p.minimum) / (p.maximum - p.minimum),
        ScaleMethod::MeanSd => (x - p.mean) / p.deviation,
        ScaleMethod::Log => {
            if x <= 0.0 {
                return Err(ScalingError::NonPositive(x));
            }
            x.ln()
        }
    })
}

/// Algebraic inverse of [`scale`] for the same parameters.
pub fn unscale(y: f64, p: &ScalerParams) -> f64 {
    match p.method {
        ScaleMethod::None => y,
        ScaleMethod::MinMax => y * (p.maximum - p.minimum) + p.minimum,
        ScaleMethod::MeanSd => y * p.deviation + p.mean,
        ScaleMethod::Log => y.exp(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn fit_mean_sd_small_column() {
        let p = fit(&[1.0, 2.0, 3.0], ScaleMethod::MeanSd).unwrap();
        assert_eq!(p.mean, 2.0);
        assert_abs_diff_eq!(p.deviation, (2.0f64 / 3.0).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn fit_min_max_endpoints() {
        let p = fit(&[0.0, 10.0], ScaleMethod::MinMax).unwrap();
        assert_eq!((p.minimum, p.maximum), (0.0, 10.0));
        assert_eq!(scale(0.0, &p).unwrap(), 0.0);
        assert_eq!(scale(10.0, &p).unwrap(), 1.0);
        assert_eq!(unscale(1.0, &p), 10.0);
    }

    #[test]
    fn fit_rejects_degenerate_and_empty() {
        assert!(matches!(
            fit(&[5.0, 5.0, 5.0], ScaleMethod::MeanSd),
            Err(ScalingError::DegenerateColumn)
        ));
        assert!(matches!(
            fit(&[5.0, 5.0], ScaleMethod::MinMax),
            Err(ScalingError::DegenerateColumn)
        ));
        assert!(matches!(fit(&[], ScaleMethod::MeanSd), Err(ScalingError::EmptyInput)));
        assert!(matches!(
            fit(&[-1.0, 2.0], ScaleMethod::Log),
            Err(ScalingError::NonPositive(_))
        ));
    }

    #[test]
    fn scale_at_mean_is_zero() {
        let p = fit(&[1.0, 2.0, 3.0], ScaleMethod::MeanSd).unwrap();
        assert_eq!(scale(2.0, &p).unwrap(), 0.0);
    }

    #[test]
    fn scale_with_published_temperature_constants() {
        let p = ScalerParams::mean_sd(19.65119934, 7.452469826, 1.81, 37.11);
        let y = scale(19.4, &p).unwrap();
        assert_abs_diff_eq!(y, -0.033706857708249244, epsilon = 1e-15);
    }

    #[test]
    fn unscale_with_published_output_constants() {
        let p = ScalerParams::mean_sd(454.3649902, 17.06699944, 420.26, 495.76);
        assert_eq!(unscale(0.0, &p), 454.3649902);
    }

    #[test]
    fn log_uses_natural_logarithm() {
        let p = fit(&[1.0, std::f64::consts::E], ScaleMethod::Log).unwrap();
        assert_abs_diff_eq!(scale(std::f64::consts::E, &p).unwrap(), 1.0, epsilon = 1e-15);
        assert!(matches!(scale(-1.0, &p), Err(ScalingError::NonPositive(_))));
    }

    #[test]
    fn mean_sd_normalizes_its_own_fit_data() {
        let values: Vec<f64> = (0..500).map(|i| (i as f64 * 0.7).sin() * 3.0 + 11.0).collect();
        let p = fit(&values, ScaleMethod::MeanSd).unwrap();
        let scaled: Vec<f64> = values.iter().map(|&v| scale(v, &p).unwrap()).collect();
        let n = scaled.len() as f64;
        let mean = scaled.iter().sum::<f64>() / n;
        let var = scaled.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n;
        assert_abs_diff_eq!(mean, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(var.sqrt(), 1.0, epsilon = 1e-10);
    }

    proptest! {
        #[test]
        fn round_trip_all_methods(
            raw in proptest::collection::vec(0.001f64..1e6, 2..40),
            x in 0.001f64..1e6,
            method_pick in 0usize..4,
        ) {
            let method = [ScaleMethod::None, ScaleMethod::MinMax, ScaleMethod::MeanSd, ScaleMethod::Log][method_pick];
            let fitted = fit(&raw, method);
            prop_assume!(fitted.is_ok());
            let p = fitted.unwrap();
            let rt = unscale(scale(x, &p).unwrap(), &p);
            prop_assert!((rt - x).abs() <= 1e-12 * x.abs().max(1.0), "{x} -> {rt}");
        }

        #[test]
        fn scale_strictly_increasing(
            raw in proptest::collection::vec(0.001f64..1e4, 3..30),
            a in 0.001f64..1e4,
            delta in 0.001f64..10.0,
            method_pick in 1usize..4,
        ) {
            let method = [ScaleMethod::None, ScaleMethod::MinMax, ScaleMethod::MeanSd, ScaleMethod::Log][method_pick];
            let fitted = fit(&raw, method);
            prop_assume!(fitted.is_ok());
            let p = fitted.unwrap();
            prop_assert!(scale(a + delta, &p).unwrap() > scale(a, &p).unwrap());
        }
    }
}
