//! The layered forecasting model: input scaling, tanh perceptron layers, a
//! linear regression head, output unscaling, and a bounding clamp.
//!
//! Parameters live in a fixed flat order (layer-major; within a layer the
//! weight matrix row-major, then the biases) so the trainer, the gradient,
//! and serialized models all agree on indexing.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::Rng;
use crate::scaling::{self, ScaleMethod, ScalerParams};

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("expected {expected} inputs, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("inputs must be finite")]
    NonFiniteInput,
    #[error("architecture needs >= 2 widths, all >= 1")]
    BadArchitecture,
    #[error("batch must be non-empty")]
    EmptyBatch,
    #[error("targets are constant; normalized error is undefined")]
    ConstantTargets,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("model file version {found} unsupported (expected {expected})")]
    FormatVersionMismatch { expected: u32, found: u32 },
    #[error("corrupt model file: {0}")]
    CorruptModel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Linear,
}

/// One dense layer: `neurons x inputs` weights plus one bias per neuron.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerceptronLayer {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    pub activation: Activation,
}

impl PerceptronLayer {
    pub fn neurons(&self) -> usize {
        self.biases.len()
    }

    pub fn inputs(&self) -> usize {
        self.weights.first().map_or(0, |row| row.len())
    }

    fn apply(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for (row, &b) in self.weights.iter().zip(&self.biases) {
            let mut acc = 0.0;
            for (&w, &x) in row.iter().zip(input) {
                acc += w * x;
            }
            let z = b + acc;
            out.push(match self.activation {
                Activation::Tanh => z.tanh(),
                Activation::Linear => z,
            });
        }
    }
}

const MODEL_FORMAT_VERSION: u32 = 1;

/// Complete model: scalers, perceptron stack, output unscaler, and bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkModel {
    pub input_names: Vec<String>,
    pub input_scalers: Vec<ScalerParams>,
    pub layers: Vec<PerceptronLayer>,
    pub output_unscaler: ScalerParams,
    /// Physical output clamp (lower, upper), applied after unscaling.
    pub bounds: (f64, f64),
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    #[serde(flatten)]
    model: NetworkModel,
}

impl NetworkModel {
    pub fn n_inputs(&self) -> usize {
        self.input_scalers.len()
    }

    /// Total number of weights and biases across perceptron layers.
    pub fn n_parameters(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.neurons() * l.inputs() + l.neurons())
            .sum()
    }

    /// Flattens all weights and biases in the documented order.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_parameters());
        for layer in &self.layers {
            for row in &layer.weights {
                out.extend_from_slice(row);
            }
            out.extend_from_slice(&layer.biases);
        }
        out
    }

    /// Writes a flat parameter vector back into the layers.
    pub fn set_parameters(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.n_parameters(), "parameter vector length mismatch");
        let mut it = params.iter();
        for layer in &mut self.layers {
            for row in &mut layer.weights {
                for w in row.iter_mut() {
                    *w = *it.next().unwrap();
                }
            }
            for b in layer.biases.iter_mut() {
                *b = *it.next().unwrap();
            }
        }
    }

    fn validate(&self) -> Result<(), NetworkError> {
        if self.layers.is_empty() {
            return Err(NetworkError::BadArchitecture);
        }
        let mut width = self.n_inputs();
        for layer in &self.layers {
            if layer.inputs() != width || layer.weights.len() != layer.biases.len() {
                return Err(NetworkError::BadArchitecture);
            }
            if layer.weights.iter().any(|r| r.len() != layer.inputs()) {
                return Err(NetworkError::BadArchitecture);
            }
            width = layer.neurons();
        }
        let head = self.layers.last().unwrap();
        if head.neurons() != 1 || head.activation != Activation::Linear {
            return Err(NetworkError::BadArchitecture);
        }
        if !(self.bounds.0 < self.bounds.1) {
            return Err(NetworkError::BadArchitecture);
        }
        if self.parameters().iter().any(|p| !p.is_finite()) {
            return Err(NetworkError::BadArchitecture);
        }
        Ok(())
    }

    /// Scaled inputs -> head output, before unscaling and bounds.
    fn forward_scaled(&self, scaled: &[f64]) -> f64 {
        let mut cur = scaled.to_vec();
        let mut next = Vec::new();
        for layer in &self.layers {
            layer.apply(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        cur[0]
    }

    fn scale_inputs(&self, x: &[f64]) -> Result<Vec<f64>, NetworkError> {
        if x.len() != self.n_inputs() {
            return Err(NetworkError::DimensionMismatch { expected: self.n_inputs(), got: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(NetworkError::NonFiniteInput);
        }
        Ok(x.iter()
            .zip(&self.input_scalers)
            .map(|(&v, p)| scaling::scale(v, p).expect("input scaling failed"))
            .collect())
    }

    /// Physical inputs -> physical output in MW, clamped to the bounds.
    pub fn forward(&self, x: &[f64]) -> Result<f64, NetworkError> {
        Ok(self.forward_unbounded(x)?.clamp(self.bounds.0, self.bounds.1))
    }

    /// Forward pass without the bounding clamp; the differentiable path.
    pub fn forward_unbounded(&self, x: &[f64]) -> Result<f64, NetworkError> {
        let scaled = self.scale_inputs(x)?;
        Ok(scaling::unscale(self.forward_scaled(&scaled), &self.output_unscaler))
    }

    /// Hidden activations of every non-head layer for one input, used by
    /// diagnostics and the saturation property.
    pub fn hidden_activations(&self, x: &[f64]) -> Result<Vec<Vec<f64>>, NetworkError> {
        let mut cur = self.scale_inputs(x)?;
        let mut next = Vec::new();
        let mut all = Vec::new();
        for layer in &self.layers[..self.layers.len() - 1] {
            layer.apply(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
            all.push(cur.clone());
        }
        Ok(all)
    }

    /// Random model for the given widths (inputs first, head last), with
    /// weights and biases i.i.d. uniform on [-1, 1]. Scalers start as
    /// identity and bounds effectively open; the training pipeline installs
    /// fitted values before use.
    pub fn initialize_random(architecture: &[usize], seed: u64) -> Result<Self, NetworkError> {
        if architecture.len() < 2 || architecture.iter().any(|&w| w == 0) {
            return Err(NetworkError::BadArchitecture);
        }
        if *architecture.last().unwrap() != 1 {
            return Err(NetworkError::BadArchitecture);
        }
        let mut rng = Rng::new(seed);
        let n_inputs = architecture[0];
        let mut layers = Vec::new();
        for w in architecture.windows(2) {
            let (fan_in, neurons) = (w[0], w[1]);
            let weights = (0..neurons)
                .map(|_| (0..fan_in).map(|_| rng.uniform_in(-1.0, 1.0)).collect())
                .collect();
            let biases = (0..neurons).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
            layers.push(PerceptronLayer { weights, biases, activation: Activation::Tanh });
        }
        layers.last_mut().unwrap().activation = Activation::Linear;
        let model = NetworkModel {
            input_names: (0..n_inputs).map(|i| format!("x{i}")).collect(),
            input_scalers: vec![ScalerParams::identity(); n_inputs],
            layers,
            output_unscaler: ScalerParams::identity(),
            bounds: (-1.0e15, 1.0e15),
        };
        model.validate()?;
        Ok(model)
    }

    /// Sum of squared errors over a batch, reusing scratch buffers across
    /// rows; this is the line-search hot path.
    pub fn sse(&self, batch: &[(Vec<f64>, f64)]) -> Result<f64, NetworkError> {
        if batch.is_empty() {
            return Err(NetworkError::EmptyBatch);
        }
        let n_inputs = self.n_inputs();
        let mut cur: Vec<f64> = Vec::with_capacity(n_inputs);
        let mut next: Vec<f64> = Vec::new();
        let mut sse = 0.0;
        for (x, y) in batch {
            if x.len() != n_inputs {
                return Err(NetworkError::DimensionMismatch { expected: n_inputs, got: x.len() });
            }
            cur.clear();
            for (&v, p) in x.iter().zip(&self.input_scalers) {
                if !v.is_finite() {
                    return Err(NetworkError::NonFiniteInput);
                }
                cur.push(scaling::scale(v, p).expect("input scaling failed"));
            }
            for layer in &self.layers {
                layer.apply(&cur, &mut next);
                std::mem::swap(&mut cur, &mut next);
            }
            let e = scaling::unscale(cur[0], &self.output_unscaler) - y;
            sse += e * e;
        }
        Ok(sse)
    }

    /// Gradient of the loss index
    /// `NSE + regularization_weight * sum(theta^2)` over the batch, in
    /// parameter order. The bounding clamp is outside the differentiable
    /// path.
    pub fn gradient(
        &self,
        batch: &[(Vec<f64>, f64)],
        regularization_weight: f64,
    ) -> Result<Vec<f64>, NetworkError> {
        let (_, mut grad, denom) = self.sse_and_gradient(batch)?;
        if denom == 0.0 {
            return Err(NetworkError::ConstantTargets);
        }
        let params = self.parameters();
        for (g, &p) in grad.iter_mut().zip(&params) {
            *g = *g / denom + 2.0 * regularization_weight * p;
        }
        Ok(grad)
    }

    /// Sum of squared errors over the batch, its gradient (unnormalized),
    /// and the NSE denominator `sum((y - mean(y))^2)`.
    pub fn sse_and_gradient(
        &self,
        batch: &[(Vec<f64>, f64)],
    ) -> Result<(f64, Vec<f64>, f64), NetworkError> {
        if batch.is_empty() {
            return Err(NetworkError::EmptyBatch);
        }
        let n_params = self.n_parameters();
        let mut grad = vec![0.0; n_params];
        let mut sse = 0.0;

        let y_mean = batch.iter().map(|(_, y)| *y).sum::<f64>() / batch.len() as f64;
        let denom: f64 = batch.iter().map(|(_, y)| (y - y_mean) * (y - y_mean)).sum();

        // per-layer parameter offsets in the flat vector
        let mut offsets = Vec::with_capacity(self.layers.len());
        let mut off = 0;
        for layer in &self.layers {
            offsets.push(off);
            off += layer.neurons() * layer.inputs() + layer.neurons();
        }

        let out_scale = match self.output_unscaler.method {
            ScaleMethod::None => 1.0,
            ScaleMethod::MinMax => self.output_unscaler.maximum - self.output_unscaler.minimum,
            ScaleMethod::MeanSd => self.output_unscaler.deviation,
            ScaleMethod::Log => panic!("log output unscaler has no constant gradient"),
        };

        // activation buffers reused across samples: inputs, then each layer
        let mut activations: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len() + 1);
        activations.push(vec![0.0; self.n_inputs()]);
        for layer in &self.layers {
            activations.push(vec![0.0; layer.neurons()]);
        }
        let mut delta: Vec<f64> = Vec::new();
        let mut prev_delta: Vec<f64> = Vec::new();

        for (x, y) in batch {
            if x.len() != self.n_inputs() {
                return Err(NetworkError::DimensionMismatch {
                    expected: self.n_inputs(),
                    got: x.len(),
                });
            }
            activations[0].clear();
            for (&v, p) in x.iter().zip(&self.input_scalers) {
                if !v.is_finite() {
                    return Err(NetworkError::NonFiniteInput);
                }
                activations[0].push(scaling::scale(v, p).expect("input scaling failed"));
            }
            for (li, layer) in self.layers.iter().enumerate() {
                let (done, rest) = activations.split_at_mut(li + 1);
                layer.apply(&done[li], &mut rest[0]);
            }
            let prediction = scaling::unscale(activations.last().unwrap()[0], &self.output_unscaler);
            let error = prediction - y;
            sse += error * error;

            // d(sse)/d(head output, scaled) for this sample
            delta.clear();
            delta.push(2.0 * error * out_scale);
            for (li, layer) in self.layers.iter().enumerate().rev() {
                let input = &activations[li];
                let output = &activations[li + 1];
                // chain through the activation
                if layer.activation == Activation::Tanh {
                    for (d, &h) in delta.iter_mut().zip(output) {
                        *d *= 1.0 - h * h;
                    }
                }
                let base = offsets[li];
                let n_in = layer.inputs();
                for (ni, &d) in delta.iter().enumerate() {
                    let wrow = base + ni * n_in;
                    for (wi, &inp) in input.iter().enumerate() {
                        grad[wrow + wi] += d * inp;
                    }
                    grad[base + layer.neurons() * n_in + ni] += d;
                }
                if li > 0 {
                    prev_delta.clear();
                    prev_delta.resize(n_in, 0.0);
                    for (ni, &d) in delta.iter().enumerate() {
                        for (wi, &w) in layer.weights[ni].iter().enumerate() {
                            prev_delta[wi] += d * w;
                        }
                    }
                    std::mem::swap(&mut delta, &mut prev_delta);
                }
            }
        }
        Ok((sse, grad, denom))
    }

    pub fn save(&self, path: &Path) -> Result<(), NetworkError> {
        let file = ModelFile { version: MODEL_FORMAT_VERSION, model: self.clone() };
        let json = serde_json::to_string_pretty(&file)
            .map_err(|e| NetworkError::CorruptModel(e.to_string()))?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, NetworkError> {
        let text = std::fs::read_to_string(path)?;
        // check the version first so a known-but-newer format is reported
        // as a version mismatch rather than a parse failure
        let probe: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| NetworkError::CorruptModel(e.to_string()))?;
        match probe.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == MODEL_FORMAT_VERSION as u64 => {}
            Some(v) => {
                return Err(NetworkError::FormatVersionMismatch {
                    expected: MODEL_FORMAT_VERSION,
                    found: v as u32,
                })
            }
            None => return Err(NetworkError::CorruptModel("missing version field".into())),
        }
        let file: ModelFile =
            serde_json::from_str(&text).map_err(|e| NetworkError::CorruptModel(e.to_string()))?;
        file.model.validate()?;
        Ok(file.model)
    }
}

/// Input field order of the published numerical model.
pub const GOLDEN_INPUT_NAMES: [&str; 4] = ["AT", "V", "AP", "RH"];

/// The published numerical model: exact scaling constants, two tanh units,
/// linear head, and the output unscaler, with bounds at the observed target
/// range.
pub fn golden_model() -> NetworkModel {
    let input_scalers = vec![
        ScalerParams::mean_sd(19.65119934, 7.452469826, 1.81, 37.11),
        ScalerParams::mean_sd(54.30580139, 12.70790005, 25.36, 81.56),
        ScalerParams::mean_sd(1013.26001, 5.938789845, 992.89, 1033.30),
        ScalerParams::mean_sd(73.30899811, 14.60029984, 25.56, 100.16),
    ];
    let hidden = PerceptronLayer {
        weights: vec![
            vec![0.593324, 0.00657032, 0.0933036, 0.0310159],
            vec![0.288555, 0.204765, -0.144645, 0.070106],
        ],
        biases: vec![0.688402, -0.110117],
        activation: Activation::Tanh,
    };
    let head = PerceptronLayer {
        weights: vec![vec![-1.34001, -1.13091]],
        biases: vec![0.582504],
        activation: Activation::Linear,
    };
    NetworkModel {
        input_names: GOLDEN_INPUT_NAMES.iter().map(|s| s.to_string()).collect(),
        input_scalers,
        layers: vec![hidden, head],
        output_unscaler: ScalerParams::mean_sd(454.3649902, 17.06699944, 420.26, 495.76),
        bounds: (420.0, 496.0),
    }
}

/// The operating point quoted alongside the published model.
pub const GOLDEN_OPTIMUM: [f64; 4] = [19.4, 25.4, 1021.4, 60.8];
