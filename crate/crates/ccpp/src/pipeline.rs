//! Default end-to-end wiring: clean, split, fit scalers on the training
//! split, initialize, train. The CLI and the acceptance suite both run
//! through this path so a bare `train` reproduces the reference
//! configuration.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{self, Dataset, SplitTag};
use crate::network::NetworkModel;
use crate::scaling::{self, ScaleMethod};
use crate::training::{self, LossConfig, StoppingCriteria, TrainingTrace};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Dataset(#[from] dataset::DatasetError),
    #[error(transparent)]
    Scaling(#[from] scaling::ScalingError),
    #[error(transparent)]
    Network(#[from] crate::network::NetworkError),
    #[error(transparent)]
    Training(#[from] training::TrainingError),
}

/// Reference configuration: 60/20/20 split, mean/deviation scaling, cleaning
/// parameter 3, one hidden layer of two tanh units.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub ratios: (f64, f64, f64),
    pub scaler: ScaleMethod,
    /// Hidden-layer widths; the input and single-output widths are implied.
    pub hidden: Vec<usize>,
    pub cleaning_parameter: f64,
    pub seed: u64,
    pub loss: LossConfig,
    pub stopping: StoppingCriteria,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            ratios: (0.6, 0.2, 0.2),
            scaler: ScaleMethod::MeanSd,
            hidden: vec![2],
            cleaning_parameter: 3.0,
            seed: 1,
            loss: LossConfig::default(),
            stopping: StoppingCriteria::default(),
        }
    }
}

/// Everything a training run produces.
pub struct PipelineOutcome {
    /// Cleaned dataset with split tags assigned.
    pub dataset: Dataset,
    pub removed_outliers: Vec<usize>,
    pub model: NetworkModel,
    pub trace: TrainingTrace,
}

/// Cleans, splits, and prepares (inputs, target) samples per split tag.
pub fn prepare(
    raw: &Dataset,
    config: &PipelineConfig,
) -> Result<(Dataset, Vec<usize>), PipelineError> {
    let (cleaned, removed) = dataset::clean_outliers(raw, config.cleaning_parameter)?;
    let split = dataset::split_random(&cleaned, config.ratios, config.seed)?;
    Ok((split, removed))
}

/// Builds a model whose scalers are fitted on the training split and whose
/// bounds cover the observed target range, with seeded random parameters.
pub fn build_model(ds: &Dataset, config: &PipelineConfig) -> Result<NetworkModel, PipelineError> {
    let input_cols = ds.input_indices();
    let target = ds
        .target_index()
        .expect("pipeline dataset must declare a target column");
    let train_rows = ds.rows_in(SplitTag::Training);

    let mut arch = Vec::with_capacity(config.hidden.len() + 2);
    arch.push(input_cols.len());
    arch.extend_from_slice(&config.hidden);
    arch.push(1);
    let mut model = NetworkModel::initialize_random(&arch, config.seed)?;

    model.input_names = input_cols
        .iter()
        .map(|&c| ds.columns()[c].name.clone())
        .collect();
    for (slot, &col) in model.input_scalers.iter_mut().zip(&input_cols) {
        let values: Vec<f64> = train_rows.iter().map(|&r| ds.value(r, col)).collect();
        *slot = scaling::fit(&values, config.scaler)?;
    }
    let train_targets: Vec<f64> = train_rows.iter().map(|&r| ds.value(r, target)).collect();
    model.output_unscaler = scaling::fit(&train_targets, config.scaler)?;

    // bounds span the target range observed across the whole table
    let target_stats = dataset::compute_stats(ds, &ds.columns()[target].name)?;
    model.bounds = (target_stats.minimum, target_stats.maximum);
    Ok(model)
}

/// Full default pipeline: clean, split, fit, train.
pub fn run_training(raw: &Dataset, config: &PipelineConfig) -> Result<PipelineOutcome, PipelineError> {
    let (ds, removed_outliers) = prepare(raw, config)?;
    let model = build_model(&ds, config)?;
    let training_rows = ds.samples_in(SplitTag::Training);
    let selection_rows = ds.samples_in(SplitTag::Selection);
    let (model, trace) =
        training::train(model, &training_rows, &selection_rows, &config.loss, &config.stopping)?;
    Ok(PipelineOutcome { dataset: ds, removed_outliers, model, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ColumnSpec, Role};
    use crate::rng::Rng;

    fn toy_table(n: usize) -> Dataset {
        let mut rng = Rng::new(3);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let a = rng.uniform_in(-1.0, 1.0);
                let b = rng.uniform_in(-1.0, 1.0);
                vec![a, b, 2.0 * a - b + 0.02 * rng.normal_pair().0]
            })
            .collect();
        Dataset::from_rows(
            vec![
                ColumnSpec::new("a", Role::Input, ""),
                ColumnSpec::new("b", Role::Input, ""),
                ColumnSpec::new("y", Role::Target, ""),
            ],
            rows,
        )
    }

    #[test]
    fn pipeline_learns_and_is_reproducible() {
        let raw = toy_table(400);
        let config = PipelineConfig {
            hidden: vec![2],
            stopping: StoppingCriteria { max_epochs: 200, ..Default::default() },
            ..Default::default()
        };
        let out1 = run_training(&raw, &config).unwrap();
        let out2 = run_training(&raw, &config).unwrap();
        assert_eq!(out1.model.parameters(), out2.model.parameters());
        assert!(out1.trace.epochs.last().unwrap().training_nse < 0.05);
    }

    #[test]
    fn scalers_come_from_training_split_only() {
        let raw = toy_table(300);
        let config = PipelineConfig::default();
        let (ds, _) = prepare(&raw, &config).unwrap();
        let model = build_model(&ds, &config).unwrap();
        let train_rows = ds.rows_in(SplitTag::Training);
        let col0: Vec<f64> = train_rows.iter().map(|&r| ds.value(r, 0)).collect();
        let expected = scaling::fit(&col0, ScaleMethod::MeanSd).unwrap();
        assert_eq!(model.input_scalers[0].mean.to_bits(), expected.mean.to_bits());
        assert_eq!(
            model.input_scalers[0].deviation.to_bits(),
            expected.deviation.to_bits()
        );
    }
}
