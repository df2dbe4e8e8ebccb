//! Command-line front end wiring the pipeline end to end.
//!
//! Every subcommand reads inputs, writes machine-readable reports (JSON/CSV)
//! into the output directory together with a replayable manifest, and prints
//! a human summary. Exit codes: 0 success, 1 usage error, 2 data/model
//! error. Flags override environment variables (`CCPP_*`), which override
//! the built-in defaults.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ccpp::correlation::{self, CorrelationMethod};
use ccpp::dataset::{self, ccpp_schema, Dataset, SplitTag, CCPP_LABELS};
use ccpp::evaluation;
use ccpp::network::{golden_model, NetworkModel, GOLDEN_OPTIMUM};
use ccpp::optimizer::{self, InputBox, OptimizeConfig};
use ccpp::pipeline::{self, PipelineConfig};
use ccpp::rng::RNG_ALGORITHM;
use ccpp::scaling::ScaleMethod;
use ccpp::selection::{self, GrowingInputsConfig, GrowingNeuronsConfig, SweepConfig};
use ccpp::training::{LossConfig, StoppingCriteria};
use ccpp::datagen;

#[derive(Parser)]
#[command(
    name = "ccpp",
    version,
    about = "Power plant energy-output forecasting and setpoint optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load the data file, report statistics and histograms
    Ingest(IngestArgs),
    /// Correlation matrices, rankings, and confidence intervals
    Correlate(CorrelateArgs),
    /// Train the forecasting network end to end
    Train(TrainArgs),
    /// Growing-inputs / growing-neurons architecture sweeps
    Select(SelectArgs),
    /// Error metrics and statistics of a trained model per split
    Evaluate(EvaluateArgs),
    /// One-off forecast at an operating point
    Predict(PredictArgs),
    /// Search the input box for maximal predicted output
    Optimize(OptimizeArgs),
    /// Emit and verify the published reference model
    Golden(GoldenArgs),
    /// Generate the synthetic reference dataset
    Datagen(DatagenArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Input data file (CSV with header AT,V,AP,RH,PE)
    #[arg(long, env = "CCPP_DATA", default_value = "data/ccpp_synthetic.csv")]
    data: PathBuf,
    /// Output directory for reports and manifests
    #[arg(long, env = "CCPP_OUT", default_value = "out")]
    out: PathBuf,
    /// Seed for splits and initialization
    #[arg(long, env = "CCPP_SEED", default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Clone)]
struct TrainKnobs {
    /// Split ratios train,selection,test
    #[arg(long, env = "CCPP_RATIOS", default_value = "0.6,0.2,0.2")]
    ratios: String,
    /// Scaler: none | min_max | mean_sd | log
    #[arg(long, env = "CCPP_SCALER", default_value = "mean_sd")]
    scaler: String,
    /// Hidden-layer widths, comma separated (the deployed net uses "2")
    #[arg(long, env = "CCPP_ARCH", default_value = "2")]
    arch: String,
    /// L2 regularization weight
    #[arg(long, env = "CCPP_REG_WEIGHT", default_value_t = 1e-3)]
    reg_weight: f64,
    /// Loss goal stopping criterion
    #[arg(long, env = "CCPP_LOSS_GOAL", default_value_t = 0.001)]
    loss_goal: f64,
    /// Maximum training epochs
    #[arg(long, env = "CCPP_MAX_EPOCHS", default_value_t = 1000)]
    max_epochs: usize,
    /// Maximum training seconds
    #[arg(long, env = "CCPP_MAX_TIME", default_value_t = 3600.0)]
    max_time: f64,
    /// Outlier cleaning parameter (z-score threshold)
    #[arg(long, env = "CCPP_CLEANING", default_value_t = 3.0)]
    cleaning: f64,
}

#[derive(Args)]
struct IngestArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Histogram bin count
    #[arg(long, default_value_t = 16)]
    bins: usize,
    /// Also report the outlier rows the cleaning pass would remove
    #[arg(long, default_value_t = 3.0)]
    cleaning: f64,
}

#[derive(Args)]
struct CorrelateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// How many top pairs to print
    #[arg(long, default_value_t = 4)]
    top: usize,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    knobs: TrainKnobs,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    knobs: TrainKnobs,
    /// Sweep mode: inputs | neurons
    #[arg(long, default_value = "neurons")]
    mode: String,
    /// Training trials per candidate
    #[arg(long, default_value_t = 3)]
    trials: usize,
    /// Growing inputs: maximum inputs
    #[arg(long, default_value_t = 4)]
    max_inputs: usize,
    /// Growing neurons: sweep range lower bound
    #[arg(long, default_value_t = 1)]
    min_neurons: usize,
    /// Growing neurons: sweep range upper bound
    #[arg(long, default_value_t = 10)]
    max_neurons: usize,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    knobs: TrainKnobs,
    /// Trained model file
    #[arg(long, env = "CCPP_MODEL", default_value = "out/model.json")]
    model: PathBuf,
    /// Top-k worst samples to report
    #[arg(long, default_value_t = 15)]
    max_error_samples: usize,
    /// Error histogram bins
    #[arg(long, default_value_t = 11)]
    bins: usize,
    /// Minkowski exponent
    #[arg(long, default_value_t = 1.5)]
    minkowski: f64,
}

#[derive(Args)]
struct PredictArgs {
    /// Trained model file
    #[arg(long, env = "CCPP_MODEL", default_value = "out/model.json")]
    model: PathBuf,
    /// Operating point, comma separated in input order (AT,V,AP,RH)
    #[arg(long)]
    input: String,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Model file; the published reference model is used when omitted
    #[arg(long, env = "CCPP_MODEL")]
    model: Option<PathBuf>,
    /// Box override "lo:hi,lo:hi,lo:hi,lo:hi"; training ranges when omitted
    #[arg(long, env = "CCPP_BOX")]
    r#box: Option<String>,
    /// Grid points per axis
    #[arg(long, default_value_t = 11)]
    grid: usize,
    /// Local ascents seeded from the best grid points
    #[arg(long, default_value_t = 8)]
    restarts: usize,
}

#[derive(Args)]
struct GoldenArgs {
    /// Output directory
    #[arg(long, env = "CCPP_OUT", default_value = "out")]
    out: PathBuf,
    /// Evaluate the model at the published optimum and compare against the
    /// embedded line-by-line transcription
    #[arg(long, default_value_t = false)]
    verify: bool,
}

#[derive(Args)]
struct DatagenArgs {
    /// Output CSV path
    #[arg(long, default_value = "data/ccpp_synthetic.csv")]
    out_file: PathBuf,
    #[arg(long, default_value_t = datagen::REFERENCE_ROWS)]
    rows: usize,
    #[arg(long, default_value_t = datagen::REFERENCE_SEED)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap help/version are success paths
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let result = match cli.command {
        Command::Ingest(args) => cmd_ingest(args),
        Command::Correlate(args) => cmd_correlate(args),
        Command::Train(args) => cmd_train(args),
        Command::Select(args) => cmd_select(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Optimize(args) => cmd_optimize(args),
        Command::Golden(args) => cmd_golden(args),
        Command::Datagen(args) => cmd_datagen(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

type CmdResult = Result<ExitCode, Box<dyn std::error::Error>>;

fn parse_ratios(s: &str) -> Result<(f64, f64, f64), String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    if parts.len() != 3 {
        return Err(format!("expected three ratios, got {}", parts.len()));
    }
    Ok((parts[0], parts[1], parts[2]))
}

fn parse_widths(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| e.to_string()))
        .collect()
}

fn pipeline_config(common: &CommonArgs, knobs: &TrainKnobs) -> Result<PipelineConfig, String> {
    Ok(PipelineConfig {
        ratios: parse_ratios(&knobs.ratios)?,
        scaler: knobs.scaler.parse::<ScaleMethod>()?,
        hidden: parse_widths(&knobs.arch)?,
        cleaning_parameter: knobs.cleaning,
        seed: common.seed,
        loss: LossConfig { regularization_weight: knobs.reg_weight, minkowski_exponent: 1.5 },
        stopping: StoppingCriteria {
            loss_goal: knobs.loss_goal,
            max_epochs: knobs.max_epochs,
            max_time_seconds: knobs.max_time,
            ..Default::default()
        },
    })
}

fn load_data(path: &Path) -> Result<Dataset, dataset::DatasetError> {
    dataset::load_csv(path, &ccpp_schema())
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value).expect("report serialization");
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}

/// Replay manifest: resolved configuration plus tool and generator versions.
fn write_manifest<T: Serialize>(dir: &Path, command: &str, config: &T) -> std::io::Result<()> {
    #[derive(Serialize)]
    struct Manifest<'a, T> {
        tool: &'a str,
        version: &'a str,
        rng_algorithm: &'a str,
        command: &'a str,
        config: &'a T,
    }
    write_json(
        dir,
        "manifest.json",
        &Manifest {
            tool: "ccpp",
            version: env!("CARGO_PKG_VERSION"),
            rng_algorithm: RNG_ALGORITHM,
            command,
            config,
        },
    )?;
    Ok(())
}

fn label_of(name: &str) -> &str {
    ccpp_schema()
        .iter()
        .position(|c| c.name == name)
        .map(|i| CCPP_LABELS[i])
        .unwrap_or("")
}

fn cmd_ingest(args: IngestArgs) -> CmdResult {
    let ds = load_data(&args.common.data)?;
    println!(
        "loaded {} rows x {} columns from {}",
        ds.n_rows(),
        ds.n_cols(),
        args.common.data.display()
    );

    #[derive(Serialize)]
    struct StatsRow {
        column: String,
        label: String,
        unit: String,
        min: f64,
        max: f64,
        mean: f64,
        deviation: f64,
        median: f64,
    }
    let mut stats = Vec::new();
    println!("{:<6} {:>10} {:>10} {:>10} {:>10} {:>10}", "column", "min", "max", "mean", "dev", "median");
    for spec in ds.columns() {
        let s = dataset::compute_stats(&ds, &spec.name)?;
        let median = dataset::column_median(&ds, &spec.name)?;
        println!(
            "{:<6} {:>10.3} {:>10.3} {:>10.3} {:>10.3} {:>10.3}",
            spec.name, s.minimum, s.maximum, s.mean, s.deviation, median
        );
        stats.push(StatsRow {
            column: spec.name.clone(),
            label: label_of(&spec.name).to_string(),
            unit: spec.unit.clone(),
            min: s.minimum,
            max: s.maximum,
            mean: s.mean,
            deviation: s.deviation,
            median,
        });
    }
    write_json(&args.common.out, "stats.json", &stats)?;

    #[derive(Serialize)]
    struct HistRow {
        column: String,
        bin_centers: Vec<f64>,
        frequencies: Vec<f64>,
    }
    let mut hists = Vec::new();
    for spec in ds.columns() {
        let h = dataset::histogram(&ds, &spec.name, args.bins)?;
        let modal = h
            .frequencies
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        println!("{}: modal bin frequency {modal:.2}% of {} bins", spec.name, h.bin_count);
        hists.push(HistRow {
            column: spec.name.clone(),
            bin_centers: h.bin_centers,
            frequencies: h.frequencies,
        });
    }
    write_json(&args.common.out, "histograms.json", &hists)?;

    let (_, removed) = dataset::clean_outliers(&ds, args.cleaning)?;
    println!("outlier cleaning at parameter {} would remove {} rows", args.cleaning, removed.len());

    #[derive(Serialize)]
    struct IngestConfig {
        data: PathBuf,
        bins: usize,
        cleaning: f64,
    }
    write_manifest(
        &args.common.out,
        "ingest",
        &IngestConfig { data: args.common.data.clone(), bins: args.bins, cleaning: args.cleaning },
    )?;
    Ok(ExitCode::SUCCESS)
}

fn print_matrix(title: &str, columns: &[String], matrix: &[Vec<f64>]) {
    println!("\n{title}");
    let mut header = String::from("        ");
    for c in columns {
        let _ = write!(header, "{c:>10}");
    }
    println!("{header}");
    for (name, row) in columns.iter().zip(matrix) {
        let mut line = format!("{name:<8}");
        for v in row {
            let _ = write!(line, "{v:>10.4}");
        }
        println!("{line}");
    }
}

fn cmd_correlate(args: CorrelateArgs) -> CmdResult {
    let ds = load_data(&args.common.data)?;

    let pearson_rep = correlation::correlation_matrix(&ds, CorrelationMethod::Pearson)?;
    let spearman_rep = correlation::correlation_matrix(&ds, CorrelationMethod::Spearman)?;
    let maximal_rep = correlation::correlation_matrix(&ds, CorrelationMethod::Maximal)?;

    print_matrix("Pearson correlations", &pearson_rep.columns, &pearson_rep.matrix);
    print_matrix("Spearman correlations", &spearman_rep.columns, &spearman_rep.matrix);
    print_matrix("Transform-family (maximal) correlations", &maximal_rep.columns, &maximal_rep.matrix);

    println!("\ntop {} pairs by |r| (maximal):", args.top);
    for p in maximal_rep.pairs.iter().take(args.top) {
        println!(
            "  {:>3} ~ {:<3} r = {:+.6}  ci [{:+.4}, {:+.4}]{}",
            p.col_a,
            p.col_b,
            p.r,
            p.ci_low,
            p.ci_high,
            if p.low_confidence { "  (low confidence)" } else { "" }
        );
    }

    // percentage differences between the maximal and Spearman matrices
    let k = maximal_rep.columns.len();
    let mut pct = vec![vec![0.0; k]; k];
    let mut largest = (0.0f64, String::new());
    for i in 0..k {
        for j in 0..k {
            let d = correlation::percentage_difference(
                maximal_rep.matrix[i][j],
                spearman_rep.matrix[i][j],
            );
            pct[i][j] = d;
            if i != j && d > largest.0 {
                largest = (d, format!("{} ~ {}", maximal_rep.columns[i], maximal_rep.columns[j]));
            }
        }
    }
    print_matrix("Percentage difference |maximal| vs |spearman|", &maximal_rep.columns, &pct);
    println!("largest off-diagonal difference: {:.3}% ({})", largest.0, largest.1);

    #[derive(Serialize)]
    struct TargetRow {
        input: String,
        pearson: f64,
        spearman: f64,
        ci_low: f64,
        ci_high: f64,
    }
    let tgt_p = correlation::input_target_correlations(&ds, CorrelationMethod::Pearson)?;
    let tgt_s = correlation::input_target_correlations(&ds, CorrelationMethod::Spearman)?;
    println!("\ninput-target correlations:");
    let mut target_rows = Vec::new();
    for ((name, rp), (_, rs)) in tgt_p.iter().zip(&tgt_s) {
        let (lo, hi) = correlation::confidence_interval(*rp, ds.n_rows(), 0.95)?;
        println!("  {name:<3} pearson {rp:+.6}  spearman {rs:+.6}  ci [{lo:+.4}, {hi:+.4}]");
        target_rows.push(TargetRow {
            input: name.clone(),
            pearson: *rp,
            spearman: *rs,
            ci_low: lo,
            ci_high: hi,
        });
    }

    #[derive(Serialize)]
    struct CorrelateOut<'a> {
        pearson: &'a correlation::CorrelationReport,
        spearman: &'a correlation::CorrelationReport,
        maximal: &'a correlation::CorrelationReport,
        percentage_difference: Vec<Vec<f64>>,
        input_target: Vec<TargetRow>,
    }
    write_json(
        &args.common.out,
        "correlations.json",
        &CorrelateOut {
            pearson: &pearson_rep,
            spearman: &spearman_rep,
            maximal: &maximal_rep,
            percentage_difference: pct,
            input_target: target_rows,
        },
    )?;

    #[derive(Serialize)]
    struct CorrelateConfig {
        data: PathBuf,
        top: usize,
    }
    write_manifest(
        &args.common.out,
        "correlate",
        &CorrelateConfig { data: args.common.data.clone(), top: args.top },
    )?;
    Ok(ExitCode::SUCCESS)
}

fn write_trace_csv(dir: &Path, trace: &ccpp::training::TrainingTrace) -> std::io::Result<()> {
    let mut text = String::from("epoch,training_loss,training_nse,selection_nse\n");
    for e in &trace.epochs {
        let _ = writeln!(text, "{},{},{},{}", e.epoch, e.training_loss, e.training_nse, e.selection_nse);
    }
    std::fs::write(dir.join("trace.csv"), text)
}

fn cmd_train(args: TrainArgs) -> CmdResult {
    let config = pipeline_config(&args.common, &args.knobs)?;
    let raw = load_data(&args.common.data)?;
    let outcome = pipeline::run_training(&raw, &config)?;

    let last = outcome.trace.epochs.last().expect("non-empty trace");
    let testing = outcome.dataset.samples_in(SplitTag::Testing);
    let r2 = evaluation::r_squared_of(&outcome.model, &testing)?;
    println!(
        "cleaned {} outlier rows; trained {} epochs ({:?})",
        outcome.removed_outliers.len(),
        outcome.trace.epochs.len(),
        outcome.trace.stop_reason
    );
    println!(
        "training nse {:.5}  selection nse {:.5}  testing R^2 {:.5}  ({:.2}s)",
        last.training_nse, last.selection_nse, r2, outcome.trace.elapsed_seconds
    );

    std::fs::create_dir_all(&args.common.out)?;
    outcome.model.save(&args.common.out.join("model.json"))?;
    write_json(&args.common.out, "trace.json", &outcome.trace)?;
    write_trace_csv(&args.common.out, &outcome.trace)?;
    write_manifest(&args.common.out, "train", &config)?;
    println!("wrote model.json, trace.json, trace.csv to {}", args.common.out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_select(args: SelectArgs) -> CmdResult {
    let config = pipeline_config(&args.common, &args.knobs)?;
    let raw = load_data(&args.common.data)?;
    let (ds, _) = pipeline::prepare(&raw, &config)?;

    let sweep = SweepConfig {
        trials: args.trials,
        seed: args.common.seed,
        loss: config.loss,
        stopping: config.stopping,
        ..Default::default()
    };
    let result = match args.mode.as_str() {
        "inputs" => selection::growing_inputs(
            &ds,
            &GrowingInputsConfig {
                sweep,
                max_inputs: args.max_inputs,
                ..Default::default()
            },
        )?,
        "neurons" => selection::growing_neurons(
            &ds,
            &GrowingNeuronsConfig {
                sweep,
                min_neurons: args.min_neurons,
                max_neurons: args.max_neurons,
            },
        )?,
        other => return Err(format!("unknown sweep mode {other:?} (use inputs|neurons)").into()),
    };

    println!(
        "{:<12} {:>14} {:>15} {:>8}",
        "candidate", "training_error", "selection_error", "epochs"
    );
    for (i, c) in result.candidates.iter().enumerate() {
        println!(
            "{:<12} {:>14.6} {:>15.6} {:>8}{}",
            c.label,
            c.training_error,
            c.selection_error,
            c.epochs,
            if i == result.chosen { "  <- chosen" } else { "" }
        );
    }
    println!("stop reason: {:?}", result.stop_reason);

    write_json(&args.common.out, "sweep.json", &result)?;
    #[derive(Serialize)]
    struct SelectConfig<'a> {
        mode: &'a str,
        trials: usize,
        max_inputs: usize,
        min_neurons: usize,
        max_neurons: usize,
        pipeline: &'a PipelineConfig,
    }
    write_manifest(
        &args.common.out,
        "select",
        &SelectConfig {
            mode: &args.mode,
            trials: args.trials,
            max_inputs: args.max_inputs,
            min_neurons: args.min_neurons,
            max_neurons: args.max_neurons,
            pipeline: &config,
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_evaluate(args: EvaluateArgs) -> CmdResult {
    let config = pipeline_config(&args.common, &args.knobs)?;
    let raw = load_data(&args.common.data)?;
    let (ds, _) = pipeline::prepare(&raw, &config)?;
    let model = NetworkModel::load(&args.model)?;

    let mut reports = Vec::new();
    let mut predicted_csv = String::from("split,actual,predicted\n");
    for (tag, name) in [
        (SplitTag::Training, "training"),
        (SplitTag::Selection, "selection"),
        (SplitTag::Testing, "testing"),
    ] {
        let rows = ds.samples_in(tag);
        let report = evaluation::error_report(
            &model,
            &rows,
            name,
            args.minkowski,
            args.max_error_samples,
            args.bins,
        )?;
        println!(
            "{name:<10} sse {:>12.4}  mse {:>9.5}  rmse {:>8.5}  nse {:>8.5}  R^2 {:>8.5}",
            report.metrics.sse,
            report.metrics.mse,
            report.metrics.rmse,
            report.metrics.nse,
            report.r_squared
        );
        println!(
            "{:<10} abs err mean {:.5} (max {:.4})  pct err mean {:.4}%",
            "",
            report.statistics.absolute.mean,
            report.statistics.absolute.maximum,
            report.statistics.percentage.mean
        );
        for (x, y) in &rows {
            let _ = writeln!(predicted_csv, "{name},{y},{}", model.forward(x)?);
        }
        reports.push(report);
    }
    let importance =
        evaluation::input_importance(&model, &ds.samples_in(SplitTag::Testing))?;
    println!("input importance (testing split):");
    for (name, score) in model.input_names.iter().zip(&importance) {
        println!("  {name:<3} {score:+.5}");
    }

    std::fs::create_dir_all(&args.common.out)?;
    write_json(&args.common.out, "evaluation.json", &reports)?;
    std::fs::write(args.common.out.join("predicted_vs_actual.csv"), predicted_csv)?;
    #[derive(Serialize)]
    struct EvalConfig<'a> {
        model: PathBuf,
        minkowski: f64,
        max_error_samples: usize,
        bins: usize,
        pipeline: &'a PipelineConfig,
    }
    write_manifest(
        &args.common.out,
        "evaluate",
        &EvalConfig {
            model: args.model.clone(),
            minkowski: args.minkowski,
            max_error_samples: args.max_error_samples,
            bins: args.bins,
            pipeline: &config,
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_predict(args: PredictArgs) -> CmdResult {
    let model = NetworkModel::load(&args.model)?;
    let x: Vec<f64> = args
        .input
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("bad --input: {e}"))?;
    let result = optimizer::what_if(&model, &x)?;
    println!("{}", serde_json::to_string_pretty(&result)?);
    if result.extrapolation {
        eprintln!("warning: operating point lies outside the training ranges");
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_box(spec: &str) -> Result<InputBox, String> {
    let bounds: Vec<(f64, f64)> = spec
        .split(',')
        .map(|pair| {
            let (lo, hi) = pair
                .split_once(':')
                .ok_or_else(|| format!("box pair {pair:?} must be lo:hi"))?;
            Ok((
                lo.trim().parse::<f64>().map_err(|e| e.to_string())?,
                hi.trim().parse::<f64>().map_err(|e| e.to_string())?,
            ))
        })
        .collect::<Result<_, String>>()?;
    InputBox::new(bounds).map_err(|e| e.to_string())
}

fn cmd_optimize(args: OptimizeArgs) -> CmdResult {
    let model = match &args.model {
        Some(path) => NetworkModel::load(path)?,
        None => golden_model(),
    };
    let ds = load_data(&args.common.data)?;
    let input_box = match &args.r#box {
        Some(spec) => parse_box(spec)?,
        None => InputBox::from_model_training_ranges(&model)?,
    };
    // default baseline: median operating conditions
    let baseline: Vec<f64> = model
        .input_names
        .iter()
        .map(|name| dataset::column_median(&ds, name))
        .collect::<Result<_, _>>()?;

    let config = OptimizeConfig {
        grid_per_dim: args.grid,
        restarts: args.restarts,
        tol: 1e-6,
    };
    let result = optimizer::maximize_output(&model, &input_box, &baseline, &config)?;
    println!(
        "baseline {:.1} MW at medians {:?}",
        result.baseline_output,
        baseline.iter().map(|v| (v * 10.0).round() / 10.0).collect::<Vec<_>>()
    );
    println!(
        "optimum  {:.1} MW at {:?} ({} evaluations{})",
        result.predicted_output,
        result.x_star.iter().map(|v| (v * 10.0).round() / 10.0).collect::<Vec<_>>(),
        result.evaluations,
        if result.saturated { ", saturated at output bound" } else { "" }
    );
    println!(
        "predicted improvement: {:.2}% ({:.1} -> {:.1} MW)",
        result.improvement_percent, result.baseline_output, result.predicted_output
    );

    write_json(&args.common.out, "setpoint.json", &result)?;
    #[derive(Serialize)]
    struct OptimizeManifest {
        model: Option<PathBuf>,
        data: PathBuf,
        grid: usize,
        restarts: usize,
        baseline: Vec<f64>,
        bounds: Vec<(f64, f64)>,
    }
    write_manifest(
        &args.common.out,
        "optimize",
        &OptimizeManifest {
            model: args.model.clone(),
            data: args.common.data.clone(),
            grid: args.grid,
            restarts: args.restarts,
            baseline,
            bounds: input_box.bounds.clone(),
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

/// Line-by-line transcription of the published numerical model, kept
/// independent of the network module on purpose: `golden --verify` compares
/// the two paths bit for bit.
fn golden_transcription(temp: f64, ev: f64, ap: f64, rh: f64) -> f64 {
    let temp_scale = 7.452469826;
    let temp_offset = 19.65119934;
    let ev_scale = 12.70790005;
    let ev_offset = 54.30580139;
    let ap_scale = 5.938789845;
    let ap_offset = 1013.26001;
    let rh_scale = 14.60029984;
    let rh_offset = 73.30899811;

    let p1_w0 = [0.593324, 0.00657032, 0.0933036, 0.0310159];
    let p1_b0 = 0.688402;
    let p1_w1 = [0.288555, 0.204765, -0.144645, 0.070106];
    let p1_b1 = -0.110117;
    let p2_w0 = [-1.34001, -1.13091];
    let p2_b0 = 0.582504;

    let us_scale = 17.06699944;
    let us_offset = 454.3649902;

    let scaled_temp = (temp - temp_offset) / temp_scale;
    let scaled_ev = (ev - ev_offset) / ev_scale;
    let scaled_ap = (ap - ap_offset) / ap_scale;
    let scaled_rh = (rh - rh_offset) / rh_scale;

    let p1_output0 = (p1_b0
        + (scaled_temp * p1_w0[0] + scaled_ev * p1_w0[1] + scaled_ap * p1_w0[2] + scaled_rh * p1_w0[3]))
        .tanh();
    let p1_output1 = (p1_b1
        + (scaled_temp * p1_w1[0] + scaled_ev * p1_w1[1] + scaled_ap * p1_w1[2] + scaled_rh * p1_w1[3]))
        .tanh();
    let p2_output0 = p2_b0 + (p1_output0 * p2_w0[0] + p1_output1 * p2_w0[1]);
    p2_output0 * us_scale + us_offset
}

fn cmd_golden(args: GoldenArgs) -> CmdResult {
    let model = golden_model();
    std::fs::create_dir_all(&args.out)?;
    let path = args.out.join("golden_model.json");
    model.save(&path)?;
    println!("wrote {}", path.display());

    if args.verify {
        let [t, v, ap, rh] = GOLDEN_OPTIMUM;
        let via_model = model.forward(&GOLDEN_OPTIMUM)?;
        let via_transcription = golden_transcription(t, v, ap, rh);
        println!("model forward at ({t}, {v}, {ap}, {rh}): {via_model:.10} MW");
        println!("line-by-line transcription:            {via_transcription:.10} MW");
        let exact = via_model.to_bits() == via_transcription.to_bits();
        println!(
            "bit-for-bit match: {}",
            if exact { "yes" } else { "NO" }
        );
        if !exact || via_model < 462.0 {
            return Err("golden verification failed".into());
        }
    }
    write_manifest(&args.out, "golden", &serde_json::json!({"verify": args.verify}))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_datagen(args: DatagenArgs) -> CmdResult {
    let ds = datagen::generate(args.rows, args.seed);
    if let Some(parent) = args.out_file.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    dataset::save_csv(&ds, &args.out_file)?;
    println!(
        "wrote {} rows (seed {}) to {}",
        args.rows,
        args.seed,
        args.out_file.display()
    );
    Ok(ExitCode::SUCCESS)
}
