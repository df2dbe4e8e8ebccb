//! Forecasting and setpoint-optimization toolkit for combined cycle power
//! plant data.
//!
//! The pipeline ingests the hourly ambient-condition table (temperature,
//! exhaust vacuum, ambient pressure, relative humidity, energy output),
//! analyzes correlations, trains a small tanh network with BFGS plus a Brent
//! line search, selects the architecture by growing inputs and neurons,
//! evaluates errors, and searches the environmental-input box for the
//! operating point with maximal predicted output.
//!
//! - [`dataset`] — loading, statistics, splitting, outlier cleaning
//! - [`scaling`] — per-column scalers and inverses
//! - [`correlation`] — Pearson / Spearman / transform-family correlations
//! - [`network`] — the layered model, gradients, and the published
//!   reference network
//! - [`training`] — loss index, BFGS, Brent line search, stopping criteria
//! - [`selection`] — growing-inputs and growing-neurons sweeps
//! - [`evaluation`] — error metrics, statistics, input importance
//! - [`optimizer`] — box-constrained setpoint search and what-if queries
//! - [`datagen`] — deterministic generator of the bundled reference file
//! - [`pipeline`] — the default end-to-end wiring used by the CLI

pub mod correlation;
pub mod datagen;
pub mod dataset;
pub mod evaluation;
pub mod network;
pub mod optimizer;
pub mod pipeline;
pub mod rng;
pub mod scaling;
pub mod selection;
pub mod training;

pub use dataset::{ccpp_schema, Dataset};
pub use network::{golden_model, NetworkModel};
