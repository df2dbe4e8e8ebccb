//! Architecture selection: growing inputs (add columns in correlation-rank
//! order) and growing neurons (sweep hidden widths), each keeping the
//! candidate with the smallest selection error.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::correlation::{self, CorrelationMethod};
use crate::dataset::{Dataset, SplitTag};
use crate::network::NetworkModel;
use crate::scaling::{self, ScaleMethod};
use crate::training::{self, LossConfig, StoppingCriteria};

#[derive(Debug, Error)]
pub enum SelectionError {
    #[error("dataset needs at least one input column and a target")]
    NoInputs,
    #[error("neuron sweep bounds must satisfy 1 <= min <= max")]
    BadNeuronRange,
    #[error(transparent)]
    Training(#[from] training::TrainingError),
    #[error(transparent)]
    Correlation(#[from] correlation::CorrelationError),
    #[error(transparent)]
    Scaling(#[from] scaling::ScalingError),
    #[error(transparent)]
    Network(#[from] crate::network::NetworkError),
}

/// Shared sweep knobs; per-candidate trainings inherit `stopping`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub trials: usize,
    pub selection_goal: f64,
    pub seed: u64,
    pub max_time_seconds: f64,
    pub loss: LossConfig,
    pub stopping: StoppingCriteria,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            trials: 3,
            selection_goal: 0.0,
            seed: 1,
            max_time_seconds: 3600.0,
            loss: LossConfig::default(),
            stopping: StoppingCriteria::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowingInputsConfig {
    pub sweep: SweepConfig,
    pub max_inputs: usize,
    /// Hidden width of every candidate; the sweep predates the neuron sweep,
    /// so it uses the initial three-neuron layer.
    pub hidden_neurons: usize,
    /// Rank candidates by the transform-family correlation instead of Pearson.
    pub rank_by_maximal: bool,
}

impl Default for GrowingInputsConfig {
    fn default() -> Self {
        GrowingInputsConfig {
            sweep: SweepConfig::default(),
            max_inputs: 4,
            hidden_neurons: 3,
            rank_by_maximal: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowingNeuronsConfig {
    pub sweep: SweepConfig,
    pub min_neurons: usize,
    pub max_neurons: usize,
}

impl Default for GrowingNeuronsConfig {
    fn default() -> Self {
        GrowingNeuronsConfig { sweep: SweepConfig::default(), min_neurons: 1, max_neurons: 10 }
    }
}

/// One evaluated candidate (an input subset or a hidden width).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateResult {
    pub label: String,
    pub inputs: Vec<String>,
    pub hidden_neurons: usize,
    pub training_error: f64,
    pub selection_error: f64,
    pub epochs: usize,
    pub best_trial_seed: u64,
    /// Wall-clock seconds; excluded from files so replays diff clean.
    #[serde(skip)]
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepStopReason {
    SelectionGoal,
    MaxInputs,
    MaxNeurons,
    MaxTime,
}

/// Sweep outcome: every candidate plus the index of the chosen one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionResult {
    pub candidates: Vec<CandidateResult>,
    pub chosen: usize,
    pub stop_reason: SweepStopReason,
}

impl SelectionResult {
    pub fn chosen_candidate(&self) -> &CandidateResult {
        &self.candidates[self.chosen]
    }

    fn finish(candidates: Vec<CandidateResult>, stop_reason: SweepStopReason) -> Self {
        let chosen = candidates
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.selection_error.partial_cmp(&b.selection_error).unwrap())
            .map(|(i, _)| i)
            .expect("sweep evaluated no candidates");
        SelectionResult { candidates, chosen, stop_reason }
    }
}

struct Candidate {
    label: String,
    input_names: Vec<String>,
    input_cols: Vec<usize>,
    hidden: usize,
}

fn run_candidate(
    ds: &Dataset,
    candidate: &Candidate,
    sweep: &SweepConfig,
) -> Result<CandidateResult, SelectionError> {
    let started = Instant::now();
    let target = ds.target_index().ok_or(SelectionError::NoInputs)?;

    let collect = |tag: SplitTag| -> Vec<(Vec<f64>, f64)> {
        ds.rows_in(tag)
            .into_iter()
            .map(|r| {
                let x = candidate.input_cols.iter().map(|&c| ds.value(r, c)).collect();
                (x, ds.value(r, target))
            })
            .collect()
    };
    let train_rows = collect(SplitTag::Training);
    let sel_rows = collect(SplitTag::Selection);

    // scalers fitted on the training split only
    let mut input_scalers = Vec::with_capacity(candidate.input_cols.len());
    for i in 0..candidate.input_cols.len() {
        let values: Vec<f64> = train_rows.iter().map(|(x, _)| x[i]).collect();
        input_scalers.push(scaling::fit(&values, ScaleMethod::MeanSd)?);
    }
    let targets: Vec<f64> = train_rows.iter().map(|(_, y)| *y).collect();
    let output_unscaler = scaling::fit(&targets, ScaleMethod::MeanSd)?;

    let mut best: Option<(f64, f64, usize, u64)> = None;
    for trial in 0..sweep.trials {
        let trial_seed = sweep.seed + trial as u64;
        let arch = [candidate.input_cols.len(), candidate.hidden, 1];
        let mut model = NetworkModel::initialize_random(&arch, trial_seed)?;
        model.input_names = candidate.input_names.clone();
        model.input_scalers = input_scalers.clone();
        model.output_unscaler = output_unscaler;
        model.bounds = (output_unscaler.minimum, output_unscaler.maximum);

        let (trained, trace) =
            training::train(model, &train_rows, &sel_rows, &sweep.loss, &sweep.stopping)?;
        let last = trace.epochs.last().expect("trace is never empty");
        let selection_error = training::nse(&trained, &sel_rows)?;
        let replace = best
            .as_ref()
            .map_or(true, |(s, _, _, _)| selection_error < *s);
        if replace {
            best = Some((selection_error, last.training_nse, trace.epochs.len(), trial_seed));
        }
    }
    let (selection_error, training_error, epochs, best_trial_seed) =
        best.expect("at least one trial runs");
    Ok(CandidateResult {
        label: candidate.label.clone(),
        inputs: candidate.input_names.clone(),
        hidden_neurons: candidate.hidden,
        training_error,
        selection_error,
        epochs,
        best_trial_seed,
        elapsed_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Ranks inputs by |correlation with the target| and evaluates the chain of
/// subsets obtained by adding them one at a time.
pub fn growing_inputs(
    ds: &Dataset,
    config: &GrowingInputsConfig,
) -> Result<SelectionResult, SelectionError> {
    let started = Instant::now();
    let method = if config.rank_by_maximal {
        CorrelationMethod::Maximal
    } else {
        CorrelationMethod::Pearson
    };
    let correlations = correlation::input_target_correlations(ds, method)?;
    if correlations.is_empty() {
        return Err(SelectionError::NoInputs);
    }
    let mut ranked: Vec<(String, f64)> = correlations;
    ranked.sort_by(|a, b| b.1.abs().partial_cmp(&a.1.abs()).unwrap());

    let mut candidates = Vec::new();
    let mut names = Vec::new();
    let mut cols = Vec::new();
    let limit = config.max_inputs.min(ranked.len());
    let mut stop_reason = SweepStopReason::MaxInputs;
    for (name, _) in ranked.into_iter().take(limit) {
        cols.push(ds.column_index(&name).expect("ranked column exists"));
        names.push(name);
        let candidate = Candidate {
            label: names.join("+"),
            input_names: names.clone(),
            input_cols: cols.clone(),
            hidden: config.hidden_neurons,
        };
        let result = run_candidate(ds, &candidate, &config.sweep)?;
        let goal_hit = result.selection_error <= config.sweep.selection_goal;
        candidates.push(result);
        if goal_hit {
            stop_reason = SweepStopReason::SelectionGoal;
            break;
        }
        if started.elapsed().as_secs_f64() >= config.sweep.max_time_seconds {
            stop_reason = SweepStopReason::MaxTime;
            break;
        }
    }
    Ok(SelectionResult::finish(candidates, stop_reason))
}

/// Trains one architecture per hidden width in `min..=max` and picks the
/// width with the smallest selection error.
pub fn growing_neurons(
    ds: &Dataset,
    config: &GrowingNeuronsConfig,
) -> Result<SelectionResult, SelectionError> {
    if config.min_neurons < 1 || config.min_neurons > config.max_neurons {
        return Err(SelectionError::BadNeuronRange);
    }
    let started = Instant::now();
    let input_cols = ds.input_indices();
    if input_cols.is_empty() {
        return Err(SelectionError::NoInputs);
    }
    let input_names: Vec<String> =
        input_cols.iter().map(|&c| ds.columns()[c].name.clone()).collect();

    let mut candidates = Vec::new();
    let mut stop_reason = SweepStopReason::MaxNeurons;
    for k in config.min_neurons..=config.max_neurons {
        let candidate = Candidate {
            label: format!("{}-{}-1", input_cols.len(), k),
            input_names: input_names.clone(),
            input_cols: input_cols.clone(),
            hidden: k,
        };
        let result = run_candidate(ds, &candidate, &config.sweep)?;
        let goal_hit = result.selection_error <= config.sweep.selection_goal;
        candidates.push(result);
        if goal_hit {
            stop_reason = SweepStopReason::SelectionGoal;
            break;
        }
        if started.elapsed().as_secs_f64() >= config.sweep.max_time_seconds {
            stop_reason = SweepStopReason::MaxTime;
            break;
        }
    }
    Ok(SelectionResult::finish(candidates, stop_reason))
}
