//! Command-line pipeline for quantum-kernel SVM experiments.
//!
//! Every stage reads and writes the documented file formats (events,
//! features, QKM1 kernels, model text files, ROC/summary CSVs), so any stage
//! can be run standalone. Exit codes: 0 success, 1 usage error, 2 runtime
//! failure.

use clap::{Args, Parser, Subcommand};
use qksvm::datagen::{generate_background, generate_signal, read_events, write_events, GenConfig};
use qksvm::encoders::{EncoderSpec, Strategy};
use qksvm::experiment::{run_experiment, sweep, ExperimentConfig};
use qksvm::kernel::{
    cross_gram, gram_matrix, matrix_hash, read_cross_matrix, read_kernel_matrix,
    write_cross_matrix, write_kernel_matrix, write_matrix_csv, KernelJob,
};
use qksvm::metrics::{accuracy, auc_from_scores, roc_curve, write_roc_csv};
use qksvm::noise::{calibrate, CalibrationMode, NoiseModel};
use qksvm::preprocess::{
    boost_all, compute_p_max, featurize, read_features, write_features, Event,
};
use qksvm::svm::{decision_function, read_model, train, write_model, TrainConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "qksvm",
    about = "Quantum-kernel SVM pipeline: generate, preprocess, kernel, train, evaluate",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic signal/background events.
    Generate(GenerateArgs),
    /// Boost, rotate to the thrust frame and normalise events into features.
    Preprocess(PreprocessArgs),
    /// Compute a kernel matrix (symmetric Gram or rectangular cross block).
    Kernel(KernelArgs),
    /// Train an SVM on a precomputed kernel.
    Train(TrainArgs),
    /// Score a model on a cross kernel and report accuracy and AUC.
    Evaluate(EvaluateArgs),
    /// Emit the ROC curve of a model on a cross kernel as CSV.
    Roc(RocArgs),
    /// Run the full repeated-split experiment protocol.
    Experiment(ExperimentArgs),
    /// Run an experiment once per value of one config axis.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Output events file.
    #[arg(long)]
    out: PathBuf,
    /// Which class to generate.
    #[arg(long, default_value = "both", value_parser = ["both", "signal", "background"])]
    class: String,
    #[arg(long, default_value_t = 200)]
    events_per_class: usize,
    #[arg(long, default_value_t = 4)]
    n_particles: usize,
    /// Angular spread of the background jets, radians.
    #[arg(long, default_value_t = 0.3)]
    jet_spread: f64,
    /// Target mean momentum magnitude, GeV/c.
    #[arg(long, default_value_t = 1.0)]
    momentum_scale: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args)]
struct PreprocessArgs {
    /// Events to featurize.
    #[arg(long)]
    events: PathBuf,
    /// Extra event files contributing to the p_max scan (e.g. the test set
    /// while featurizing the training set).
    #[arg(long = "pmax-from")]
    pmax_from: Vec<PathBuf>,
    /// Override p_max instead of scanning the inputs.
    #[arg(long)]
    p_max: Option<f64>,
    /// Output features file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EncoderArgs {
    /// Encoding strategy: combinatorial | bloch | separate-particle |
    /// separate-particle-bloch.
    #[arg(long, default_value = "separate-particle-bloch")]
    encoder: String,
    /// Encoding layers L.
    #[arg(long, default_value_t = 2)]
    layers: usize,
    /// Entangle the two qubits of each particle (separate-particle-bloch).
    #[arg(long, default_value_t = false)]
    intra: bool,
}

impl EncoderArgs {
    fn spec(&self) -> Result<EncoderSpec, qksvm::Error> {
        let spec = EncoderSpec::new(Strategy::parse(&self.encoder)?, self.layers)
            .with_intra(self.intra);
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Args)]
struct NoiseArgs {
    /// Enable the stochastic noise model during sampling.
    #[arg(long, default_value_t = false)]
    noise: bool,
    /// Depolarizing probability per one-qubit gate.
    #[arg(long, default_value_t = 0.001)]
    p1: f64,
    /// Depolarizing probability per CNOT.
    #[arg(long, default_value_t = 0.02)]
    p2: f64,
    /// Symmetric readout flip probability per qubit.
    #[arg(long, default_value_t = 0.02)]
    readout_flip: f64,
    /// Apply measurement-error mitigation to sampled kernels.
    #[arg(long, default_value_t = false)]
    mitigation: bool,
    /// Shots per calibration preparation.
    #[arg(long, default_value_t = 16384)]
    cal_shots: u64,
    /// Calibration mode: auto | full | tensored.
    #[arg(long, default_value = "auto")]
    cal_mode: String,
}

#[derive(Args)]
struct KernelArgs {
    /// Feature file for the rows (and columns, unless --against is given).
    #[arg(long)]
    features: PathBuf,
    /// Train-side feature file for a rectangular test x train block.
    #[arg(long)]
    against: Option<PathBuf>,
    #[command(flatten)]
    encoder: EncoderArgs,
    /// Shots per kernel entry; 0 selects the exact statevector path.
    #[arg(long, default_value_t = 0)]
    shots: u64,
    #[arg(long, default_value_t = 11)]
    seed: u64,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Output kernel file (QKM1).
    #[arg(long)]
    out: PathBuf,
    /// Checkpoint file for resumable symmetric Gram runs.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Also write the matrix as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Training kernel (QKM1, symmetric).
    #[arg(long)]
    kernel: PathBuf,
    /// Feature file carrying the training labels.
    #[arg(long)]
    features: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1e-3)]
    tolerance: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_passes: usize,
    /// On non-convergence, shift the kernel diagonal to restore positive
    /// semidefiniteness and retrain once.
    #[arg(long, default_value_t = false)]
    auto_shift: bool,
    /// Output model file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    /// Cross kernel (test rows x train columns).
    #[arg(long)]
    kernel: PathBuf,
    /// Feature file carrying the test labels.
    #[arg(long)]
    features: PathBuf,
    /// Optionally also write the ROC curve.
    #[arg(long)]
    roc: Option<PathBuf>,
}

#[derive(Args)]
struct RocArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    kernel: PathBuf,
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config file (`key = value`); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Config overrides, e.g. --set encoder.strategy=bloch.
    #[arg(long = "set")]
    overrides: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "set")]
    overrides: Vec<String>,
    /// Config key to vary, e.g. splits.n_train or encoder.strategy.
    #[arg(long)]
    axis: String,
    /// Comma-separated values for the axis.
    #[arg(long)]
    values: String,
    #[arg(long)]
    out: PathBuf,
}

fn load_config(path: &Option<PathBuf>, overrides: &[String]) -> Result<ExperimentConfig, qksvm::Error> {
    let mut config = match path {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    for entry in overrides {
        let (key, value) = entry.split_once('=').ok_or_else(|| {
            qksvm::Error::BadConfig(format!("override `{entry}` is not key=value"))
        })?;
        config.set(key.trim(), value)?;
    }
    Ok(config)
}

fn load_labels(path: &PathBuf) -> Result<(Vec<qksvm::FeatureVector>, Vec<i8>), qksvm::Error> {
    let (features, labels, _) = read_features::<f64>(path)?;
    let labels = labels
        .into_iter()
        .map(|l| l.ok_or(qksvm::Error::EmptyInput("features file contains unlabeled events")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((features, labels))
}

fn run(cli: Cli) -> Result<(), qksvm::Error> {
    match cli.command {
        Command::Generate(args) => {
            let cfg = GenConfig::<f64> {
                n_particles: args.n_particles,
                events_per_class: args.events_per_class,
                jet_spread: args.jet_spread,
                momentum_scale: args.momentum_scale,
                seed: args.seed,
            };
            cfg.validate()?;
            let mut events: Vec<Event> = Vec::new();
            if args.class != "background" {
                for index in 0..cfg.events_per_class as u64 {
                    events.push(generate_signal(&cfg, index)?);
                }
            }
            if args.class != "signal" {
                for index in 0..cfg.events_per_class as u64 {
                    events.push(generate_background(&cfg, index)?);
                }
            }
            write_events(&args.out, &events)?;
            println!("wrote {} events to {}", events.len(), args.out.display());
        }
        Command::Preprocess(args) => {
            let events = read_events::<f64>(&args.events)?;
            let boosted = boost_all(&events)?;
            let p_max = match args.p_max {
                Some(value) => value,
                None => {
                    let mut pools = vec![boosted.clone()];
                    for path in &args.pmax_from {
                        pools.push(boost_all(&read_events::<f64>(path)?)?);
                    }
                    let slices: Vec<&[Event]> = pools.iter().map(|p| p.as_slice()).collect();
                    compute_p_max(&slices)?
                }
            };
            let features = featurize(&boosted, p_max)?;
            let clamped: usize = features.iter().map(|f| f.clamped).sum();
            let labels: Vec<Option<i8>> = events.iter().map(|e| e.label).collect();
            write_features(&args.out, &features, &labels, p_max)?;
            println!(
                "wrote {} feature vectors to {} (p_max = {p_max}, {clamped} momenta clamped)",
                features.len(),
                args.out.display()
            );
        }
        Command::Kernel(args) => {
            let spec = args.encoder.spec()?;
            let (features, _, _) = read_features::<f64>(&args.features)?;
            let n_qubits = spec.n_qubits_for(features.first().map_or(0, |f| f.values.len()))?;
            let noise = if args.noise.noise {
                Some(NoiseModel::uniform(
                    n_qubits,
                    args.noise.p1,
                    args.noise.p2,
                    args.noise.readout_flip,
                    args.noise.readout_flip,
                ))
            } else {
                None
            };
            let calibration = if args.noise.mitigation {
                let model = noise
                    .as_ref()
                    .ok_or_else(|| qksvm::Error::BadConfig("--mitigation needs --noise".into()))?;
                let mode = match args.noise.cal_mode.as_str() {
                    "auto" => CalibrationMode::default_for(n_qubits),
                    other => CalibrationMode::parse(other)?,
                };
                Some(calibrate(n_qubits, args.noise.cal_shots, args.seed ^ 0xca11, model, mode)?)
            } else {
                None
            };
            let job = KernelJob { shots: args.shots, seed: args.seed, noise, calibration };
            match &args.against {
                None => {
                    let gram = gram_matrix(&features, &spec, &job, args.checkpoint.as_deref())?;
                    write_kernel_matrix(&args.out, &gram)?;
                    if let Some(csv) = &args.csv {
                        write_matrix_csv(csv, gram.n(), gram.n(), gram.entries())?;
                    }
                    println!(
                        "wrote {0}x{0} kernel to {1} (hash {2:016x})",
                        gram.n(),
                        args.out.display(),
                        matrix_hash(&gram)
                    );
                }
                Some(train_path) => {
                    let (train_features, _, _) = read_features::<f64>(train_path)?;
                    let cross = cross_gram(&features, &train_features, &spec, &job)?;
                    write_cross_matrix(&args.out, &cross)?;
                    if let Some(csv) = &args.csv {
                        write_matrix_csv(csv, cross.rows(), cross.cols(), cross.entries())?;
                    }
                    println!(
                        "wrote {}x{} cross kernel to {}",
                        cross.rows(),
                        cross.cols(),
                        args.out.display()
                    );
                }
            }
        }
        Command::Train(args) => {
            let mut kernel = read_kernel_matrix::<f64>(&args.kernel)?;
            let (_, labels) = load_labels(&args.features)?;
            let config = TrainConfig { c: args.c, tolerance: args.tolerance, max_passes: args.max_passes };
            let mut model = train(&kernel, &labels, &config)?;
            if !model.converged && args.auto_shift {
                if let Some(shift) = kernel.psd_shift() {
                    kernel.shift_diagonal(shift);
                    model = train(&kernel, &labels, &config)?;
                    println!("applied diagonal shift {shift} to restore positive semidefiniteness");
                }
            }
            write_model(&args.out, &model)?;
            println!(
                "trained on {} points: {} support vectors, bias {}, converged {}",
                labels.len(),
                model.support_indices.len(),
                model.bias,
                model.converged
            );
        }
        Command::Evaluate(args) => {
            let model = read_model::<f64>(&args.model)?;
            let cross = read_cross_matrix::<f64>(&args.kernel)?;
            let (_, labels) = load_labels(&args.features)?;
            let scores = decision_function(&model, &cross)?;
            let predicted: Vec<u8> = scores.iter().map(|&s| u8::from(s >= 0.0)).collect();
            let truth: Vec<u8> = labels.iter().map(|&l| u8::from(l > 0)).collect();
            let signal_mask: Vec<bool> = labels.iter().map(|&l| l > 0).collect();
            let acc: f64 = accuracy(&predicted, &truth)?;
            let auc = auc_from_scores(&scores, &signal_mask)?;
            if let Some(path) = &args.roc {
                write_roc_csv(path, &roc_curve(&scores, &signal_mask)?)?;
            }
            println!("accuracy = {acc}");
            println!("auc = {auc}");
        }
        Command::Roc(args) => {
            let model = read_model::<f64>(&args.model)?;
            let cross = read_cross_matrix::<f64>(&args.kernel)?;
            let (_, labels) = load_labels(&args.features)?;
            let scores = decision_function(&model, &cross)?;
            let signal_mask: Vec<bool> = labels.iter().map(|&l| l > 0).collect();
            let points = roc_curve(&scores, &signal_mask)?;
            write_roc_csv(&args.out, &points)?;
            println!("wrote {} ROC points to {}", points.len(), args.out.display());
        }
        Command::Experiment(args) => {
            let config = load_config(&args.config, &args.overrides)?;
            let summary = run_experiment(&config, &args.out)?;
            for method in &summary.methods {
                println!(
                    "{}: accuracy {} +- {}, auc {} +- {} ({} repeats)",
                    method.name,
                    method.mean_accuracy,
                    method.stderr_accuracy,
                    method.mean_auc,
                    method.stderr_auc,
                    method.repeats.len()
                );
            }
            println!("artifacts in {}", summary.out_dir.display());
        }
        Command::Sweep(args) => {
            let config = load_config(&args.config, &args.overrides)?;
            let values: Vec<String> = args
                .values
                .split(',')
                .map(|v| v.trim().to_string())
                .filter(|v| !v.is_empty())
                .collect();
            let results = sweep(&config, &args.axis, &values, &args.out)?;
            for (value, summary) in &results {
                for method in &summary.methods {
                    println!(
                        "{} = {value}: {} auc {} +- {}",
                        args.axis, method.name, method.mean_auc, method.stderr_auc
                    );
                }
            }
            println!("sweep summary in {}", args.out.join("sweep_summary.csv").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help/version requests are not usage errors.
            use clap::error::ErrorKind;
            let _ = err.print();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
