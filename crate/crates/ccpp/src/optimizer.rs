//! Box-constrained search over the environmental inputs for the operating
//! point that maximizes predicted output, plus one-off what-if queries.
//!
//! The search is deterministic: a coarse grid scan seeds a fixed number of
//! coordinate-wise golden-section ascents, and ties are broken toward the
//! earlier candidate, so identical configurations always return the same
//! point.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{NetworkError, NetworkModel};

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error("box has no volume on axis {0} (lower >= upper)")]
    EmptyBox(usize),
    #[error("box must have one (lower, upper) pair per model input")]
    BoxDimensionMismatch,
    #[error("baseline point lies outside the box on axis {0}")]
    BaselineOutsideBox(usize),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Per-input closed interval in physical units.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputBox {
    pub bounds: Vec<(f64, f64)>,
}

impl InputBox {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self, OptimizerError> {
        for (i, (lo, hi)) in bounds.iter().enumerate() {
            if !(lo < hi) {
                return Err(OptimizerError::EmptyBox(i));
            }
        }
        Ok(InputBox { bounds })
    }

    /// The per-input ranges the model's scalers were fitted on.
    pub fn from_model_training_ranges(model: &NetworkModel) -> Result<Self, OptimizerError> {
        InputBox::new(model.input_scalers.iter().map(|p| (p.minimum, p.maximum)).collect())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.bounds.len()
            && x.iter()
                .zip(&self.bounds)
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OptimizeConfig {
    pub grid_per_dim: usize,
    pub restarts: usize,
    pub tol: f64,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig { grid_per_dim: 11, restarts: 8, tol: 1e-6 }
    }
}

/// Search outcome. `trace` records the baseline and every evaluation that
/// improved the incumbent, in order, so the best-so-far value is
/// non-decreasing by construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SetpointResult {
    pub x_star: Vec<f64>,
    pub predicted_output: f64,
    pub baseline_output: f64,
    pub improvement_percent: f64,
    pub evaluations: usize,
    /// True when the best prediction was clamped by the model's output bounds.
    pub saturated: bool,
    pub trace: Vec<(Vec<f64>, f64)>,
}

/// What-if forecast with an extrapolation warning.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WhatIf {
    pub output_mw: f64,
    /// Set when any input lies outside the range its scaler was fitted on.
    pub extrapolation: bool,
}

/// Forward pass at an arbitrary operating point; inputs outside the training
/// ranges are flagged rather than rejected.
pub fn what_if(model: &NetworkModel, x: &[f64]) -> Result<WhatIf, OptimizerError> {
    let output_mw = model.forward(x)?;
    let extrapolation = x
        .iter()
        .zip(&model.input_scalers)
        .any(|(v, p)| *v < p.minimum || *v > p.maximum);
    Ok(WhatIf { output_mw, extrapolation })
}

const GOLDEN_RATIO: f64 = 0.618_033_988_749_895;

/// Maximizes predicted output over the box.
///
/// An 11-points-per-axis grid scan (endpoints included) seeds `restarts`
/// coordinate-wise golden-section ascents; the result dominates both the
/// grid maximum and the baseline. When the box equals the ranges the model
/// was trained on, the output clamp is lifted during the search; otherwise
/// clamped results are reported with the saturation flag.
pub fn maximize_output(
    model: &NetworkModel,
    input_box: &InputBox,
    baseline: &[f64],
    config: &OptimizeConfig,
) -> Result<SetpointResult, OptimizerError> {
    let dims = model.n_inputs();
    if input_box.bounds.len() != dims {
        return Err(OptimizerError::BoxDimensionMismatch);
    }
    for (i, (v, (lo, hi))) in baseline.iter().zip(&input_box.bounds).enumerate() {
        if *v < *lo || *v > *hi {
            return Err(OptimizerError::BaselineOutsideBox(i));
        }
    }

    // lift the bounding clamp when searching inside the training box
    let training_box = model
        .input_scalers
        .iter()
        .zip(&input_box.bounds)
        .all(|(p, (lo, hi))| {
            let scale = (p.maximum - p.minimum).abs().max(1.0);
            (p.minimum - lo).abs() <= 1e-9 * scale && (p.maximum - hi).abs() <= 1e-9 * scale
        });

    let mut evaluations = 0usize;
    let mut objective = |x: &[f64]| -> Result<f64, OptimizerError> {
        evaluations += 1;
        Ok(if training_box { model.forward_unbounded(x)? } else { model.forward(x)? })
    };

    let baseline_output = objective(baseline)?;
    let mut trace: Vec<(Vec<f64>, f64)> = vec![(baseline.to_vec(), baseline_output)];
    let mut best_x = baseline.to_vec();
    let mut best_f = baseline_output;

    // coarse grid scan, kept as ascent seeds
    let g = config.grid_per_dim.max(2);
    let axis_points: Vec<Vec<f64>> = input_box
        .bounds
        .iter()
        .map(|(lo, hi)| {
            (0..g)
                .map(|i| lo + (hi - lo) * i as f64 / (g - 1) as f64)
                .collect()
        })
        .collect();
    let mut seeds: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut index = vec![0usize; dims];
    loop {
        let x: Vec<f64> = index.iter().zip(&axis_points).map(|(&i, pts)| pts[i]).collect();
        let f = objective(&x)?;
        if f > best_f {
            best_f = f;
            best_x = x.clone();
            trace.push((x.clone(), f));
        }
        seeds.push((x, f));
        // odometer increment over the grid
        let mut d = 0;
        loop {
            if d == dims {
                break;
            }
            index[d] += 1;
            if index[d] < g {
                break;
            }
            index[d] = 0;
            d += 1;
        }
        if d == dims {
            break;
        }
    }
    seeds.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    seeds.truncate(config.restarts.max(1));

    // coordinate-wise golden-section ascent from each seed
    for (seed_x, seed_f) in seeds {
        let mut x = seed_x;
        let mut fx = seed_f;
        for _sweep in 0..60 {
            let before = fx;
            for axis in 0..dims {
                let (lo, hi) = input_box.bounds[axis];
                let (t, ft) = golden_section_axis(&mut objective, &mut x, axis, lo, hi, config.tol)?;
                x[axis] = t;
                fx = ft;
            }
            if fx - before <= config.tol {
                break;
            }
        }
        if fx > best_f {
            best_f = fx;
            best_x = x.clone();
            trace.push((x, fx));
        }
    }

    let saturated = !training_box
        && (best_f <= model.bounds.0 || best_f >= model.bounds.1);
    Ok(SetpointResult {
        x_star: best_x,
        predicted_output: best_f,
        baseline_output,
        improvement_percent: 100.0 * (best_f - baseline_output) / baseline_output,
        evaluations,
        saturated,
        trace,
    })
}

/// Golden-section maximization along one axis, holding the others fixed.
fn golden_section_axis<F>(
    objective: &mut F,
    x: &mut Vec<f64>,
    axis: usize,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, f64), OptimizerError>
where
    F: FnMut(&[f64]) -> Result<f64, OptimizerError>,
{
    let original = x[axis];
    let mut eval = |t: f64, x: &mut Vec<f64>| -> Result<f64, OptimizerError> {
        x[axis] = t;
        objective(x)
    };
    let mut a = lo;
    let mut b = hi;
    let mut c = b - GOLDEN_RATIO * (b - a);
    let mut d = a + GOLDEN_RATIO * (b - a);
    let mut fc = eval(c, x)?;
    let mut fd = eval(d, x)?;
    while (b - a).abs() > tol.max(1e-12) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN_RATIO * (b - a);
            fc = eval(c, x)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN_RATIO * (b - a);
            fd = eval(d, x)?;
        }
    }
    let t = 0.5 * (a + b);
    let ft = eval(t, x)?;
    // never step to a worse point than where the axis started
    let f_original = eval(original, x)?;
    if ft >= f_original {
        Ok((t, ft))
    } else {
        Ok((original, f_original))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{golden_model, GOLDEN_OPTIMUM};
    use crate::scaling::ScalerParams;

    fn training_box() -> InputBox {
        InputBox::from_model_training_ranges(&golden_model()).unwrap()
    }

    #[test]
    fn box_construction_and_membership() {
        assert!(matches!(
            InputBox::new(vec![(1.0, 1.0)]),
            Err(OptimizerError::EmptyBox(0))
        ));
        let b = InputBox::new(vec![(0.0, 1.0), (-1.0, 1.0)]).unwrap();
        assert!(b.contains(&[0.5, 0.0]));
        assert!(!b.contains(&[1.5, 0.0]));
    }

    #[test]
    fn what_if_at_published_optimum_no_extrapolation() {
        let m = golden_model();
        let w = what_if(&m, &GOLDEN_OPTIMUM).unwrap();
        assert!(!w.extrapolation);
        assert!(w.output_mw >= 462.0);
    }

    #[test]
    fn what_if_flags_extrapolation() {
        let m = golden_model();
        let w = what_if(&m, &[-50.0, 25.4, 1021.4, 60.8]).unwrap();
        assert!(w.extrapolation);
        assert!(w.output_mw.is_finite());
    }

    #[test]
    fn what_if_at_column_means_is_mid_range() {
        let m = golden_model();
        let means = [19.65119934, 54.30580139, 1013.26001, 73.30899811];
        let w = what_if(&m, &means).unwrap();
        assert!((w.output_mw - 454.4).abs() < 10.0, "{}", w.output_mw);
        assert!(!w.extrapolation);
    }

    #[test]
    fn constant_model_improvement_is_zero() {
        let mut m = golden_model();
        let mut p = m.parameters();
        for v in p.iter_mut() {
            *v = 0.0;
        }
        m.set_parameters(&p);
        let baseline = [20.0, 50.0, 1013.0, 70.0];
        let r = maximize_output(&m, &training_box(), &baseline, &OptimizeConfig::default()).unwrap();
        assert_eq!(r.improvement_percent, 0.0);
        assert_eq!(r.predicted_output, r.baseline_output);
    }

    #[test]
    fn monotone_single_input_pins_the_upper_bound() {
        // one input, identity scaling, positive single weight: f increases in x
        let mut m = crate::network::NetworkModel::initialize_random(&[1, 1], 1).unwrap();
        m.set_parameters(&[2.0, 0.0]);
        m.input_scalers = vec![ScalerParams::mean_sd(0.0, 1.0, -5.0, 5.0)];
        m.output_unscaler = ScalerParams::identity();
        m.bounds = (-100.0, 100.0);
        let b = InputBox::new(vec![(-5.0, 5.0)]).unwrap();
        let r = maximize_output(&m, &b, &[0.0], &OptimizeConfig::default()).unwrap();
        assert!((r.x_star[0] - 5.0).abs() < 1e-3, "{:?}", r.x_star);
        assert!((r.predicted_output - 10.0).abs() < 1e-3);
    }

    #[test]
    fn result_dominates_grid_and_baseline_and_stays_feasible() {
        let m = golden_model();
        let b = training_box();
        let baseline = [20.3, 52.1, 1013.0, 75.0];
        let r = maximize_output(&m, &b, &baseline, &OptimizeConfig::default()).unwrap();
        assert!(r.predicted_output >= r.baseline_output);
        assert!(b.contains(&r.x_star));
        for (x, _) in &r.trace {
            assert!(b.contains(x), "trace point outside the box: {x:?}");
        }
        // anytime monotonicity of the recorded trace
        for pair in r.trace.windows(2) {
            assert!(pair[1].1 >= pair[0].1);
        }
        // dominance over a recomputed grid maximum
        let g = 11;
        let mut grid_best = f64::NEG_INFINITY;
        let axes: Vec<Vec<f64>> = b
            .bounds
            .iter()
            .map(|(lo, hi)| (0..g).map(|i| lo + (hi - lo) * i as f64 / (g - 1) as f64).collect())
            .collect();
        for &t in &axes[0] {
            for &v in &axes[1] {
                for &ap in &axes[2] {
                    for &rh in &axes[3] {
                        let f = m.forward_unbounded(&[t, v, ap, rh]).unwrap();
                        grid_best = grid_best.max(f);
                    }
                }
            }
        }
        assert!(r.predicted_output >= grid_best - 1e-9);
    }

    #[test]
    fn deterministic_given_config() {
        let m = golden_model();
        let b = training_box();
        let baseline = [20.3, 52.1, 1013.0, 75.0];
        let r1 = maximize_output(&m, &b, &baseline, &OptimizeConfig::default()).unwrap();
        let r2 = maximize_output(&m, &b, &baseline, &OptimizeConfig::default()).unwrap();
        assert_eq!(r1.x_star, r2.x_star);
        assert_eq!(r1.predicted_output.to_bits(), r2.predicted_output.to_bits());
    }

    #[test]
    fn baseline_outside_box_is_rejected() {
        let m = golden_model();
        let b = training_box();
        assert!(matches!(
            maximize_output(&m, &b, &[0.0, 52.1, 1013.0, 75.0], &OptimizeConfig::default()),
            Err(OptimizerError::BaselineOutsideBox(0))
        ));
    }

    #[test]
    fn narrower_box_reports_saturation_only_when_clamped() {
        let m = golden_model();
        // a box strictly inside the training ranges keeps the clamp active
        let b = InputBox::new(vec![
            (10.0, 30.0),
            (40.0, 70.0),
            (1000.0, 1025.0),
            (40.0, 90.0),
        ])
        .unwrap();
        let r = maximize_output(&m, &b, &[20.0, 50.0, 1013.0, 70.0], &OptimizeConfig::default())
            .unwrap();
        assert!(r.predicted_output <= m.bounds.1);
        assert_eq!(r.saturated, r.predicted_output >= m.bounds.1);
    }
}
