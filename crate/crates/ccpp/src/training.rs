//! Loss index, quasi-Newton optimizer, derivative-free line search, and the
//! epoch loop with the configured stopping criteria.
//!
//! The loss index is the normalized squared error over the batch plus an L2
//! penalty on all weights and biases. Each epoch takes one BFGS step whose
//! length comes from a Brent search along the descent direction; the inverse
//! Hessian approximation is rank-two updated under a curvature guard and
//! reset to the identity whenever an update is skipped or the search fails.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{NetworkError, NetworkModel};
use crate::rng::RNG_ALGORITHM;

#[derive(Debug, Error)]
pub enum TrainingError {
    #[error("no bracketing interval found after {0} expansions")]
    BracketFailure(usize),
    #[error("training batch must be non-empty")]
    EmptyBatch,
    #[error("targets are constant; normalized error undefined")]
    ConstantTargets,
    #[error("loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("dimension mismatch between state and gradient")]
    DimensionMismatch,
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Error-term and regularization configuration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LossConfig {
    pub regularization_weight: f64,
    /// Reported by the evaluation metrics; not part of the trained objective.
    pub minkowski_exponent: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig { regularization_weight: 1e-3, minkowski_exponent: 1.5 }
    }
}

/// Stopping criteria, checked after every epoch in the order they are
/// declared here; the first satisfied criterion ends training.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StoppingCriteria {
    pub loss_goal: f64,
    pub gradient_norm_goal: f64,
    pub min_loss_decrease: f64,
    pub max_selection_failures: usize,
    pub max_epochs: usize,
    pub max_time_seconds: f64,
}

impl Default for StoppingCriteria {
    fn default() -> Self {
        StoppingCriteria {
            loss_goal: 0.001,
            gradient_norm_goal: 0.0,
            min_loss_decrease: 0.0,
            max_selection_failures: 100,
            max_epochs: 1000,
            max_time_seconds: 3600.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    LossGoal,
    GradientGoal,
    MinDecrease,
    SelectionFailures,
    MaxEpochs,
    MaxTime,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Optimized objective: training NSE plus the L2 term.
    pub training_loss: f64,
    /// Training NSE alone.
    pub training_nse: f64,
    /// Selection NSE with parameters frozen after the epoch's update.
    pub selection_nse: f64,
}

/// Per-epoch history and the reason training stopped.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub rng_algorithm: String,
    pub regularization_weight: f64,
    pub epochs: Vec<EpochRecord>,
    pub stop_reason: StopReason,
    pub best_epoch: usize,
    /// Wall-clock seconds; excluded from serialized traces so replays of the
    /// same seed produce byte-identical files.
    #[serde(skip)]
    pub elapsed_seconds: f64,
}

/// Normalized squared error of the model over the rows.
pub fn nse(model: &NetworkModel, rows: &[(Vec<f64>, f64)]) -> Result<f64, TrainingError> {
    if rows.is_empty() {
        return Err(TrainingError::EmptyBatch);
    }
    let n = rows.len() as f64;
    let y_mean = rows.iter().map(|(_, y)| *y).sum::<f64>() / n;
    let denom: f64 = rows.iter().map(|(_, y)| (y - y_mean) * (y - y_mean)).sum();
    if denom == 0.0 {
        return Err(TrainingError::ConstantTargets);
    }
    Ok(model.sse(rows)? / denom)
}

/// The trained objective: NSE plus `regularization_weight * sum(theta^2)`.
pub fn loss_index(
    model: &NetworkModel,
    rows: &[(Vec<f64>, f64)],
    config: &LossConfig,
) -> Result<f64, TrainingError> {
    let reg: f64 = model.parameters().iter().map(|p| p * p).sum();
    Ok(nse(model, rows)? + config.regularization_weight * reg)
}

/// Inverse Hessian approximation with the standard rank-two BFGS update.
#[derive(Debug, Clone)]
pub struct BfgsState {
    h: Vec<Vec<f64>>,
}

impl BfgsState {
    pub fn identity(dim: usize) -> Self {
        let mut h = vec![vec![0.0; dim]; dim];
        for (i, row) in h.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        BfgsState { h }
    }

    pub fn dim(&self) -> usize {
        self.h.len()
    }

    pub fn reset(&mut self) {
        let dim = self.dim();
        *self = BfgsState::identity(dim);
    }

    /// Descent direction `-H g`.
    pub fn direction(&self, gradient: &[f64]) -> Result<Vec<f64>, TrainingError> {
        if gradient.len() != self.dim() {
            return Err(TrainingError::DimensionMismatch);
        }
        Ok(self
            .h
            .iter()
            .map(|row| -row.iter().zip(gradient).map(|(h, g)| h * g).sum::<f64>())
            .collect())
    }

    /// Applies the rank-two update for step `s` and gradient change `y`.
    /// Returns false (and resets to the identity) when the curvature
    /// condition fails, which would destroy positive definiteness.
    pub fn update(&mut self, s: &[f64], y: &[f64]) -> bool {
        let dim = self.dim();
        debug_assert_eq!(s.len(), dim);
        debug_assert_eq!(y.len(), dim);
        let sy: f64 = s.iter().zip(y).map(|(a, b)| a * b).sum();
        let s_norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if sy <= 1e-10 * s_norm * y_norm {
            self.reset();
            return false;
        }
        let rho = 1.0 / sy;
        // H' = (I - rho s y^T) H (I - rho y s^T) + rho s s^T
        let hy: Vec<f64> = self
            .h
            .iter()
            .map(|row| row.iter().zip(y).map(|(h, g)| h * g).sum())
            .collect();
        let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
        for i in 0..dim {
            for j in 0..dim {
                self.h[i][j] += -rho * (s[i] * hy[j] + hy[i] * s[j])
                    + rho * rho * yhy * s[i] * s[j]
                    + rho * s[i] * s[j];
            }
        }
        true
    }

    /// Largest asymmetry |H - H^T|, for the symmetry invariant.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim() {
            for j in (i + 1)..self.dim() {
                worst = worst.max((self.h[i][j] - self.h[j][i]).abs());
            }
        }
        worst
    }
}

const GOLDEN_RATIO_STEP: f64 = 0.381_966_011_250_105;

/// Expands from step 1 by halving/doubling until a bracketing triple
/// (a, b, c) with `f(b) < f(a)` and `f(b) < f(c)` appears.
fn bracket<F: FnMut(f64) -> f64>(f: &mut F, f0: f64) -> Result<(f64, f64, f64, f64), TrainingError> {
    const MAX_ATTEMPTS: usize = 50;
    let mut t = 1.0;
    let mut ft = f(t);
    if ft < f0 {
        // walk outward until the function rises again
        let (mut a, mut b, mut fb) = (0.0, t, ft);
        for _ in 0..MAX_ATTEMPTS {
            let c = b * 2.0;
            let fc = f(c);
            if fc >= fb {
                return Ok((a, b, c, fb));
            }
            a = b;
            b = c;
            fb = fc;
        }
        Err(TrainingError::BracketFailure(MAX_ATTEMPTS))
    } else {
        // shrink toward zero until the function dips below f(0)
        for _ in 0..MAX_ATTEMPTS {
            let c = t;
            t /= 2.0;
            ft = f(t);
            if ft < f0 {
                return Ok((0.0, t, c, ft));
            }
        }
        Err(TrainingError::BracketFailure(MAX_ATTEMPTS))
    }
}

/// Brent minimization of a one-dimensional objective along the search
/// direction. Requires the bracketing produced by forward expansion from
/// step 1; returns a step within `tolerance` of a local minimizer with
/// `f(step) <= f(0)`.
pub fn brent_line_search<F: FnMut(f64) -> f64>(
    mut f: F,
    tolerance: f64,
) -> Result<f64, TrainingError> {
    let f0 = f(0.0);
    let (a0, b0, c0, fb0) = bracket(&mut f, f0)?;
    let (mut a, mut c) = (a0, c0);
    let mut x = b0;
    let mut w = b0;
    let mut v = b0;
    let mut fx = fb0;
    let mut fw = fb0;
    let mut fv = fb0;
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;

    for _ in 0..100 {
        let m = 0.5 * (a + c);
        let tol1 = tolerance * x.abs() + 1e-12;
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (c - a) {
            break;
        }
        let mut use_golden = true;
        if e.abs() > tol1 {
            // parabolic fit through (x, w, v)
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            } else {
                q = -q;
            }
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (c - x) {
                d = p / q;
                let u = x + d;
                if (u - a) < tol2 || (c - u) < tol2 {
                    d = if x < m { tol1 } else { -tol1 };
                }
                use_golden = false;
            }
        }
        if use_golden {
            e = if x < m { c - x } else { a - x };
            d = GOLDEN_RATIO_STEP * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                c = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u >= x {
                c = u;
            } else {
                a = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    debug_assert!(fx <= f0);
    Ok(x)
}

/// Fixed fallback step applied when no bracket can be found.
pub const FALLBACK_STEP: f64 = 1e-3;

/// Line-search tolerance used throughout the pipeline.
pub const LINE_SEARCH_TOLERANCE: f64 = 0.001;

/// Trains the model on the training rows, tracking selection NSE per epoch.
///
/// Each epoch: gradient, BFGS direction, Brent step, parameter update,
/// record. Training stops at the first satisfied criterion in the order
/// LossGoal, GradientGoal, MinDecrease, SelectionFailures, MaxEpochs,
/// MaxTime, and returns the final-epoch parameters with the trace.
pub fn train(
    model: NetworkModel,
    training: &[(Vec<f64>, f64)],
    selection: &[(Vec<f64>, f64)],
    loss_config: &LossConfig,
    stopping: &StoppingCriteria,
) -> Result<(NetworkModel, TrainingTrace), TrainingError> {
    if training.is_empty() || selection.is_empty() {
        return Err(TrainingError::EmptyBatch);
    }
    let mut model = model;
    let started = Instant::now();
    let reg = loss_config.regularization_weight;

    let n = training.len() as f64;
    let y_mean = training.iter().map(|(_, y)| *y).sum::<f64>() / n;
    let denom: f64 = training.iter().map(|(_, y)| (y - y_mean) * (y - y_mean)).sum();
    if denom == 0.0 {
        return Err(TrainingError::ConstantTargets);
    }

    let penalty = |params: &[f64]| -> f64 { reg * params.iter().map(|p| p * p).sum::<f64>() };
    let full_loss = |m: &NetworkModel| -> Result<(f64, f64), TrainingError> {
        let nse = m.sse(training)? / denom;
        Ok((nse + penalty(&m.parameters()), nse))
    };

    let mut theta = model.parameters();
    let mut state = BfgsState::identity(theta.len());
    let (mut loss, _) = full_loss(&model)?;
    let mut gradient = model.gradient(training, reg)?;

    let mut epochs: Vec<EpochRecord> = Vec::new();
    let mut best_selection = f64::INFINITY;
    let mut best_epoch = 0usize;
    let mut selection_failures = 0usize;

    let stop_reason = loop {
        let epoch = epochs.len() + 1;
        let direction = state.direction(&gradient)?;

        let mut probe = model.clone();
        let mut evaluate_step = |t: f64| -> f64 {
            let candidate: Vec<f64> =
                theta.iter().zip(&direction).map(|(p, d)| p + t * d).collect();
            probe.set_parameters(&candidate);
            match full_loss(&probe) {
                Ok((l, _)) => l,
                Err(_) => f64::INFINITY,
            }
        };
        let (step, search_failed) = match brent_line_search(&mut evaluate_step, LINE_SEARCH_TOLERANCE)
        {
            Ok(t) => (t, false),
            Err(TrainingError::BracketFailure(_)) => (FALLBACK_STEP, true),
            Err(other) => return Err(other),
        };

        let new_theta: Vec<f64> =
            theta.iter().zip(&direction).map(|(p, d)| p + step * d).collect();
        model.set_parameters(&new_theta);
        let (new_loss, new_nse) = full_loss(&model)?;
        if !new_loss.is_finite() {
            return Err(TrainingError::NonFiniteLoss { epoch });
        }
        let new_gradient = model.gradient(training, reg)?;

        if search_failed {
            state.reset();
        } else {
            debug_assert!(
                new_loss <= loss + 1e-12,
                "line search accepted an increase: {loss} -> {new_loss}"
            );
            let s: Vec<f64> = new_theta.iter().zip(&theta).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = new_gradient.iter().zip(&gradient).map(|(a, b)| a - b).collect();
            state.update(&s, &y);
        }

        let selection_nse = nse(&model, selection)?;
        epochs.push(EpochRecord {
            epoch,
            training_loss: new_loss,
            training_nse: new_nse,
            selection_nse,
        });
        if selection_nse < best_selection {
            best_selection = selection_nse;
            best_epoch = epoch - 1;
            selection_failures = 0;
        } else {
            selection_failures += 1;
        }

        let decrease = loss - new_loss;
        theta = new_theta;
        let grad_norm = new_gradient.iter().map(|g| g * g).sum::<f64>().sqrt();
        loss = new_loss;
        gradient = new_gradient;

        if loss <= stopping.loss_goal {
            break StopReason::LossGoal;
        }
        if grad_norm <= stopping.gradient_norm_goal {
            break StopReason::GradientGoal;
        }
        if decrease <= stopping.min_loss_decrease {
            break StopReason::MinDecrease;
        }
        if selection_failures >= stopping.max_selection_failures {
            break StopReason::SelectionFailures;
        }
        if epoch >= stopping.max_epochs {
            break StopReason::MaxEpochs;
        }
        if started.elapsed().as_secs_f64() >= stopping.max_time_seconds {
            break StopReason::MaxTime;
        }
    };

    let trace = TrainingTrace {
        rng_algorithm: RNG_ALGORITHM.to_string(),
        regularization_weight: reg,
        epochs,
        stop_reason,
        best_epoch,
        elapsed_seconds: started.elapsed().as_secs_f64(),
    };
    Ok((model, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::NetworkModel;
    use crate::rng::Rng;
    use approx::assert_abs_diff_eq;

    fn toy_batch(seed: u64, n: usize) -> Vec<(Vec<f64>, f64)> {
        let mut rng = Rng::new(seed);
        (0..n)
            .map(|_| {
                let x: Vec<f64> = (0..4).map(|_| rng.uniform_in(-2.0, 2.0)).collect();
                let y = 3.0 * x[0] - x[1] + 0.5 * x[2] + rng.normal_pair().0 * 0.1;
                (x, y)
            })
            .collect()
    }

    #[test]
    fn loss_index_zero_for_perfect_predictions() {
        // identity network predicting its own input
        let mut m = NetworkModel::initialize_random(&[1, 1], 3).unwrap();
        m.set_parameters(&[1.0, 0.0]);
        let rows = vec![(vec![1.0], 1.0), (vec![2.0], 2.0), (vec![5.0], 5.0)];
        let cfg = LossConfig { regularization_weight: 0.0, minkowski_exponent: 1.5 };
        assert_eq!(loss_index(&m, &rows, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn loss_index_one_when_predicting_the_mean() {
        let mut m = NetworkModel::initialize_random(&[1, 1], 3).unwrap();
        m.set_parameters(&[0.0, 2.0]); // constant prediction 2 = mean of targets
        let rows = vec![(vec![0.0], 1.0), (vec![0.0], 2.0), (vec![0.0], 3.0)];
        let cfg = LossConfig { regularization_weight: 0.0, minkowski_exponent: 1.5 };
        assert_abs_diff_eq!(loss_index(&m, &rows, &cfg).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn loss_index_matches_independent_oracle() {
        let m = NetworkModel::initialize_random(&[4, 2, 1], 8).unwrap();
        let rows = toy_batch(5, 16);
        let cfg = LossConfig::default();
        // one-line oracle, written independently of the implementation path
        let ybar: f64 = rows.iter().map(|(_, y)| y).sum::<f64>() / rows.len() as f64;
        let oracle = rows
            .iter()
            .map(|(x, y)| (m.forward_unbounded(x).unwrap() - y).powi(2))
            .sum::<f64>()
            / rows.iter().map(|(_, y)| (y - ybar).powi(2)).sum::<f64>()
            + cfg.regularization_weight
                * m.parameters().iter().map(|p| p * p).sum::<f64>();
        assert_abs_diff_eq!(loss_index(&m, &rows, &cfg).unwrap(), oracle, epsilon = 1e-12);
    }

    #[test]
    fn loss_index_rejects_constant_targets() {
        let m = NetworkModel::initialize_random(&[1, 1], 3).unwrap();
        let rows = vec![(vec![0.0], 2.0), (vec![1.0], 2.0)];
        assert!(matches!(
            loss_index(&m, &rows, &LossConfig::default()),
            Err(TrainingError::ConstantTargets)
        ));
    }

    #[test]
    fn identity_state_gives_steepest_descent() {
        let state = BfgsState::identity(3);
        let d = state.direction(&[1.0, -2.0, 0.5]).unwrap();
        assert_eq!(d, vec![-1.0, 2.0, -0.5]);
        assert!(state.direction(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn update_preserves_symmetry_over_many_steps() {
        let mut rng = Rng::new(15);
        let mut state = BfgsState::identity(6);
        for _ in 0..100 {
            let s: Vec<f64> = (0..6).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
            // force positive curvature so updates apply
            let y: Vec<f64> = s.iter().map(|v| v * 2.0 + 0.1 * rng.uniform()).collect();
            state.update(&s, &y);
            assert!(state.asymmetry() < 1e-10);
        }
    }

    #[test]
    fn update_skips_and_resets_on_bad_curvature() {
        let mut state = BfgsState::identity(2);
        state.update(&[1.0, 0.0], &[2.0, 0.5]);
        let applied = state.update(&[1.0, 0.0], &[-1.0, 0.0]);
        assert!(!applied);
        // reset means steepest descent again
        assert_eq!(state.direction(&[1.0, 1.0]).unwrap(), vec![-1.0, -1.0]);
    }

    /// On an SPD quadratic with exact line search, BFGS terminates within
    /// dim + 2 iterations.
    #[test]
    fn quadratic_termination() {
        let mut rng = Rng::new(71);
        for dim in [2usize, 5, 9, 13] {
            for _case in 0..5 {
                // A = B^T B + I (symmetric positive definite)
                let b: Vec<Vec<f64>> = (0..dim)
                    .map(|_| (0..dim).map(|_| rng.uniform_in(-1.0, 1.0)).collect())
                    .collect();
                let mut a = vec![vec![0.0; dim]; dim];
                for i in 0..dim {
                    for j in 0..dim {
                        let mut acc = 0.0;
                        for k in 0..dim {
                            acc += b[k][i] * b[k][j];
                        }
                        a[i][j] = acc + if i == j { 1.0 } else { 0.0 };
                    }
                }
                let grad = |x: &[f64]| -> Vec<f64> {
                    a.iter()
                        .map(|row| row.iter().zip(x).map(|(aij, xj)| aij * xj).sum())
                        .collect()
                };
                let mut x: Vec<f64> = (0..dim).map(|_| rng.uniform_in(-2.0, 2.0)).collect();
                let mut state = BfgsState::identity(dim);
                let mut g = grad(&x);
                let mut iterations = 0;
                while g.iter().map(|v| v * v).sum::<f64>().sqrt() >= 1e-8 {
                    iterations += 1;
                    assert!(iterations <= dim + 2, "dim {dim}: not done after {iterations}");
                    let d = state.direction(&g).unwrap();
                    // exact step for a quadratic: t = -g.d / d.A.d
                    let gd: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
                    let ad = grad(&d);
                    let dad: f64 = d.iter().zip(&ad).map(|(a, b)| a * b).sum();
                    let t = -gd / dad;
                    let s: Vec<f64> = d.iter().map(|v| t * v).collect();
                    for (xi, si) in x.iter_mut().zip(&s) {
                        *xi += si;
                    }
                    let g_new = grad(&x);
                    let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
                    state.update(&s, &y);
                    g = g_new;
                }
                assert!(x.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-7);
            }
        }
    }

    #[test]
    fn brent_finds_parabola_minimum() {
        let t = brent_line_search(|t| (t - 2.0) * (t - 2.0), 0.001).unwrap();
        assert_abs_diff_eq!(t, 2.0, epsilon = 1e-3);
    }

    #[test]
    fn brent_fails_on_monotone_decreasing_objective() {
        assert!(matches!(
            brent_line_search(|t| -t, 0.001),
            Err(TrainingError::BracketFailure(_))
        ));
    }

    #[test]
    fn brent_matches_grid_oracle_on_random_quartics() {
        let mut rng = Rng::new(41);
        for _ in 0..25 {
            // convex quartic with minimum at a random point in (0, 4)
            let c = rng.uniform_in(0.05, 4.0);
            let a4 = rng.uniform_in(0.01, 0.5);
            let a2 = rng.uniform_in(0.2, 2.0);
            let f = |t: f64| a4 * (t - c).powi(4) + a2 * (t - c).powi(2);
            let found = brent_line_search(f, 0.001).unwrap();
            // dense grid oracle
            let mut best = (f64::INFINITY, 0.0);
            let mut t = 0.0;
            while t < 8.0 {
                let v = f(t);
                if v < best.0 {
                    best = (v, t);
                }
                t += 1e-5;
            }
            assert_abs_diff_eq!(found, best.1, epsilon = 2e-3);
        }
    }

    fn pipeline_model(seed: u64, rows: &[(Vec<f64>, f64)]) -> NetworkModel {
        let mut m = NetworkModel::initialize_random(&[4, 2, 1], seed).unwrap();
        let ys: Vec<f64> = rows.iter().map(|(_, y)| *y).collect();
        let p = crate::scaling::fit(&ys, crate::scaling::ScaleMethod::MeanSd).unwrap();
        m.output_unscaler = p;
        m.bounds = (p.minimum - 50.0, p.maximum + 50.0);
        for (i, sc) in m.input_scalers.iter_mut().enumerate() {
            let xs: Vec<f64> = rows.iter().map(|(x, _)| x[i]).collect();
            *sc = crate::scaling::fit(&xs, crate::scaling::ScaleMethod::MeanSd).unwrap();
        }
        m
    }

    #[test]
    fn infinite_loss_goal_stops_after_first_epoch() {
        let rows = toy_batch(4, 60);
        let model = pipeline_model(1, &rows);
        let stopping = StoppingCriteria { loss_goal: f64::INFINITY, ..Default::default() };
        let (_, trace) = train(model, &rows, &rows, &LossConfig::default(), &stopping).unwrap();
        assert_eq!(trace.epochs.len(), 1);
        assert_eq!(trace.stop_reason, StopReason::LossGoal);
    }

    #[test]
    fn max_epochs_bounds_trace_length() {
        let rows = toy_batch(4, 60);
        let model = pipeline_model(1, &rows);
        let stopping = StoppingCriteria {
            max_epochs: 5,
            min_loss_decrease: -1.0, // never stall-stop
            ..Default::default()
        };
        let (_, trace) = train(model, &rows, &rows, &LossConfig::default(), &stopping).unwrap();
        assert_eq!(trace.epochs.len(), 5);
        assert_eq!(trace.stop_reason, StopReason::MaxEpochs);
    }

    #[test]
    fn training_loss_monotone_and_learns_toy_problem() {
        let rows = toy_batch(21, 200);
        let model = pipeline_model(2, &rows);
        let (trained, trace) =
            train(model, &rows, &rows, &LossConfig::default(), &StoppingCriteria::default())
                .unwrap();
        for pair in trace.epochs.windows(2) {
            assert!(
                pair[1].training_loss <= pair[0].training_loss + 1e-12,
                "loss rose between epochs"
            );
        }
        let final_nse = trace.epochs.last().unwrap().training_nse;
        assert!(final_nse < 0.05, "toy linear problem should fit well, nse {final_nse}");
        assert!(trace.best_epoch < trace.epochs.len());
        drop(trained);
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let rows = toy_batch(10, 80);
        let sel = toy_batch(11, 40);
        let stopping = StoppingCriteria { max_epochs: 40, ..Default::default() };
        let run = || {
            let model = pipeline_model(7, &rows);
            train(model, &rows, &sel, &LossConfig::default(), &stopping).unwrap()
        };
        let (m1, t1) = run();
        let (m2, t2) = run();
        assert_eq!(m1.parameters(), m2.parameters());
        assert_eq!(t1.epochs.len(), t2.epochs.len());
        for (a, b) in t1.epochs.iter().zip(&t2.epochs) {
            assert_eq!(a.training_loss.to_bits(), b.training_loss.to_bits());
            assert_eq!(a.selection_nse.to_bits(), b.selection_nse.to_bits());
        }
    }

    #[test]
    fn selection_loss_excludes_regularization() {
        let rows = toy_batch(31, 60);
        let model = pipeline_model(3, &rows);
        let stopping = StoppingCriteria { max_epochs: 3, ..Default::default() };
        let cfg = LossConfig { regularization_weight: 10.0, minkowski_exponent: 1.5 };
        let (trained, trace) = train(model, &rows, &rows, &cfg, &stopping).unwrap();
        let last = trace.epochs.last().unwrap();
        let expected = nse(&trained, &rows).unwrap();
        assert_eq!(last.selection_nse.to_bits(), expected.to_bits());
        assert!(last.training_loss > last.training_nse, "loss must include the L2 term");
    }

    #[test]
    fn trace_serialization_omits_wall_clock() {
        let rows = toy_batch(4, 30);
        let model = pipeline_model(1, &rows);
        let stopping = StoppingCriteria { max_epochs: 2, ..Default::default() };
        let (_, trace) = train(model, &rows, &rows, &LossConfig::default(), &stopping).unwrap();
        let json = serde_json::to_string(&trace).unwrap();
        assert!(!json.contains("elapsed_seconds"));
        assert!(json.contains("xoshiro256++"));
    }
}
