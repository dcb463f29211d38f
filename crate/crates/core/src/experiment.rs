//! The repeated-split experiment protocol: generate a pool, draw seeded
//! disjoint train/test splits, preprocess with `p_max` taken over both
//! splits, compute Gram and cross kernels, train, score, and report mean and
//! standard error of accuracy and AUC over the repeats, optionally alongside
//! an RBF baseline on identical splits.
//!
//! Everything downstream of the master seed is derived deterministically, so
//! a run repeated with the same resolved configuration writes bit-identical
//! summary files.

use crate::datagen::{generate_dataset, write_events, GenConfig};
use crate::encoders::{EncoderSpec, Strategy};
use crate::error::{Error, Result};
use crate::kernel::{
    cross_gram, gram_matrix, rbf_cross, rbf_gram, rbf_tag, write_cross_matrix,
    write_kernel_matrix, KernelJob,
};
use crate::metrics::{accuracy, auc_from_scores, mean_and_stderr, roc_curve, write_roc_csv};
use crate::noise::{calibrate, CalibrationMode, NoiseModel};
use crate::preprocess::{boost_all, compute_p_max, featurize, write_features, Event};
use crate::rng::derive_seed;
use crate::scalar::{real, Real};
use crate::svm::{decision_function, predict, train, write_model, SvmModel, TrainConfig};
use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// Train/test sizes and the number of repeated random splits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub n_train: usize,
    pub n_test: usize,
    pub n_repeats: usize,
}

/// The resolved configuration of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig<T = f64> {
    pub seed: u64,
    pub gen: GenConfig<T>,
    pub encoder: EncoderSpec,
    /// Shots per kernel entry; 0 selects the exact statevector path.
    pub shots: u64,
    pub noise_enabled: bool,
    pub noise_p1: T,
    pub noise_p2: T,
    pub noise_readout_flip: T,
    pub mitigation_enabled: bool,
    /// `None` picks the mode from the qubit count (tensored above 4 qubits).
    pub mitigation_mode: Option<CalibrationMode>,
    pub calibration_shots: u64,
    pub svm: TrainConfig<T>,
    /// RBF baseline grid; empty disables the baseline.
    pub baseline_sigmas: Vec<T>,
    pub splits: SplitSpec,
}

impl<T: Real> Default for ExperimentConfig<T> {
    /// The desk-scale preset: 3 particles, 30 train / 30 test, 10 repeats,
    /// separate-particle-with-Bloch encoding, 8192 shots.
    fn default() -> Self {
        ExperimentConfig {
            seed: 17,
            gen: GenConfig { n_particles: 3, events_per_class: 100, ..GenConfig::default() },
            encoder: EncoderSpec::new(Strategy::SeparateParticleBloch, 2),
            shots: 8192,
            noise_enabled: false,
            noise_p1: real(0.001),
            noise_p2: real(0.02),
            noise_readout_flip: real(0.02),
            mitigation_enabled: false,
            mitigation_mode: None,
            calibration_shots: 16384,
            svm: TrainConfig::default(),
            baseline_sigmas: Vec::new(),
            splits: SplitSpec { n_train: 30, n_test: 30, n_repeats: 10 },
        }
    }
}

impl<T: Real> ExperimentConfig<T> {
    pub fn validate(&self) -> Result<()> {
        self.gen.validate()?;
        self.encoder.validate()?;
        self.svm.validate()?;
        if self.splits.n_repeats == 0 || self.splits.n_train < 2 || self.splits.n_test == 0 {
            return Err(Error::BadConfig(
                "splits require n_repeats >= 1, n_train >= 2, n_test >= 1".into(),
            ));
        }
        let signal_need = self.splits.n_train.div_ceil(2) + self.splits.n_test.div_ceil(2);
        let background_need = self.splits.n_train / 2 + self.splits.n_test / 2;
        if signal_need.max(background_need) > self.gen.events_per_class {
            return Err(Error::BadConfig(format!(
                "splits need {} events per class but the pool has {}",
                signal_need.max(background_need),
                self.gen.events_per_class
            )));
        }
        if self.noise_enabled && self.shots == 0 {
            return Err(Error::BadConfig("noise needs sampled kernels (kernel.shots > 0)".into()));
        }
        if self.mitigation_enabled && !self.noise_enabled {
            return Err(Error::BadConfig("mitigation needs noise.enabled = true".into()));
        }
        if self.mitigation_enabled && self.calibration_shots == 0 {
            return Err(Error::BadConfig("mitigation.cal_shots must be >= 1".into()));
        }
        for &sigma in &self.baseline_sigmas {
            if sigma <= T::zero() {
                return Err(Error::BadConfig("baseline sigmas must be positive".into()));
            }
        }
        Ok(())
    }

    /// Serialise as the plain `key = value` config format, in fixed order.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let sigmas = self
            .baseline_sigmas
            .iter()
            .map(|s| format!("{s}"))
            .collect::<Vec<_>>()
            .join(",");
        let mode = match self.mitigation_mode {
            None => "auto",
            Some(CalibrationMode::Full) => "full",
            Some(CalibrationMode::Tensored) => "tensored",
        };
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "gen.n_particles = {}", self.gen.n_particles);
        let _ = writeln!(out, "gen.events_per_class = {}", self.gen.events_per_class);
        let _ = writeln!(out, "gen.jet_spread = {}", self.gen.jet_spread);
        let _ = writeln!(out, "gen.momentum_scale = {}", self.gen.momentum_scale);
        let _ = writeln!(out, "gen.seed = {}", self.gen.seed);
        let _ = writeln!(out, "encoder.strategy = {}", self.encoder.strategy.name());
        let _ = writeln!(out, "encoder.layers = {}", self.encoder.layers);
        let _ = writeln!(out, "encoder.intra = {}", self.encoder.intra_particle_entangle);
        let _ = writeln!(out, "kernel.shots = {}", self.shots);
        let _ = writeln!(out, "noise.enabled = {}", self.noise_enabled);
        let _ = writeln!(out, "noise.p1 = {}", self.noise_p1);
        let _ = writeln!(out, "noise.p2 = {}", self.noise_p2);
        let _ = writeln!(out, "noise.readout_flip = {}", self.noise_readout_flip);
        let _ = writeln!(out, "mitigation.enabled = {}", self.mitigation_enabled);
        let _ = writeln!(out, "mitigation.mode = {mode}");
        let _ = writeln!(out, "mitigation.cal_shots = {}", self.calibration_shots);
        let _ = writeln!(out, "svm.c = {}", self.svm.c);
        let _ = writeln!(out, "svm.tolerance = {}", self.svm.tolerance);
        let _ = writeln!(out, "svm.max_passes = {}", self.svm.max_passes);
        let _ = writeln!(out, "baseline.rbf_sigmas = {sigmas}");
        let _ = writeln!(out, "splits.n_train = {}", self.splits.n_train);
        let _ = writeln!(out, "splits.n_test = {}", self.splits.n_test);
        let _ = writeln!(out, "splits.n_repeats = {}", self.splits.n_repeats);
        out
    }

    /// Apply one `key = value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let bad = |what: &str| Error::BadConfig(format!("bad value `{value}` for {what}"));
        let parse_u64 = |what: &str| value.parse::<u64>().map_err(|_| bad(what));
        let parse_usize = |what: &str| value.parse::<usize>().map_err(|_| bad(what));
        let parse_real = |what: &str| -> Result<T> {
            value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .and_then(T::from_f64)
                .ok_or_else(|| bad(what))
        };
        let parse_bool = |what: &str| -> Result<bool> {
            match value {
                "true" | "1" => Ok(true),
                "false" | "0" => Ok(false),
                _ => Err(bad(what)),
            }
        };
        match key {
            "seed" => self.seed = parse_u64(key)?,
            "gen.n_particles" => self.gen.n_particles = parse_usize(key)?,
            "gen.events_per_class" => self.gen.events_per_class = parse_usize(key)?,
            "gen.jet_spread" => self.gen.jet_spread = parse_real(key)?,
            "gen.momentum_scale" => self.gen.momentum_scale = parse_real(key)?,
            "gen.seed" => self.gen.seed = parse_u64(key)?,
            "encoder.strategy" => self.encoder.strategy = Strategy::parse(value)?,
            "encoder.layers" => self.encoder.layers = parse_usize(key)?,
            "encoder.intra" => self.encoder.intra_particle_entangle = parse_bool(key)?,
            "kernel.shots" => self.shots = parse_u64(key)?,
            "noise.enabled" => self.noise_enabled = parse_bool(key)?,
            "noise.p1" => self.noise_p1 = parse_real(key)?,
            "noise.p2" => self.noise_p2 = parse_real(key)?,
            "noise.readout_flip" => self.noise_readout_flip = parse_real(key)?,
            "mitigation.enabled" => self.mitigation_enabled = parse_bool(key)?,
            "mitigation.mode" => {
                self.mitigation_mode = match value {
                    "auto" => None,
                    other => Some(CalibrationMode::parse(other)?),
                }
            }
            "mitigation.cal_shots" => self.calibration_shots = parse_u64(key)?,
            "svm.c" => self.svm.c = parse_real(key)?,
            "svm.tolerance" => self.svm.tolerance = parse_real(key)?,
            "svm.max_passes" => self.svm.max_passes = parse_usize(key)?,
            "baseline.rbf_sigmas" => {
                let mut sigmas = Vec::new();
                for part in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    sigmas.push(
                        part.parse::<f64>()
                            .ok()
                            .and_then(T::from_f64)
                            .ok_or_else(|| bad(key))?,
                    );
                }
                self.baseline_sigmas = sigmas;
            }
            "splits.n_train" => self.splits.n_train = parse_usize(key)?,
            "splits.n_test" => self.splits.n_test = parse_usize(key)?,
            "splits.n_repeats" => self.splits.n_repeats = parse_usize(key)?,
            other => return Err(Error::BadConfig(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Parse the `key = value` config format (`#` starts a comment).
    pub fn parse(content: &str, origin: &str) -> Result<Self> {
        let mut config = Self::default();
        for (index, raw) in content.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: origin.to_string(),
                line: index + 1,
                msg: "expected `key = value`".into(),
            })?;
            config.set(key.trim(), value).map_err(|e| Error::Parse {
                path: origin.to_string(),
                line: index + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let content = fs::read_to_string(path)?;
        Self::parse(&content, &path.display().to_string())
    }
}

/// One repeat's metrics for one method.
#[derive(Debug, Clone, PartialEq)]
pub struct RepeatRecord<T = f64> {
    pub accuracy: T,
    pub auc: T,
    pub p_max: T,
    /// Diagonal shift applied when the sampled kernel was indefinite enough
    /// to stall the solver.
    pub diagonal_shift: Option<T>,
}

/// Per-method aggregate over all repeats.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary<T = f64> {
    pub name: String,
    pub repeats: Vec<RepeatRecord<T>>,
    pub mean_accuracy: T,
    pub stderr_accuracy: T,
    pub mean_auc: T,
    pub stderr_auc: T,
}

/// Everything an experiment run reports.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary<T = f64> {
    pub methods: Vec<MethodSummary<T>>,
    pub out_dir: PathBuf,
}

impl<T: Real> ExperimentSummary<T> {
    /// The quantum-kernel method row (always first).
    pub fn qsvm(&self) -> &MethodSummary<T> {
        &self.methods[0]
    }

    pub fn method(&self, name: &str) -> Option<&MethodSummary<T>> {
        self.methods.iter().find(|m| m.name == name)
    }
}

struct RepeatOutput<T> {
    qsvm: RepeatRecord<T>,
    baselines: Vec<RepeatRecord<T>>,
}

/// Balanced, seeded, disjoint train/test index draw for one repeat.
fn draw_split(
    seed: u64,
    repeat: usize,
    events_per_class: usize,
    n_train: usize,
    n_test: usize,
) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "split", repeat as u64));
    let mut signal: Vec<usize> = (0..events_per_class).collect();
    let mut background: Vec<usize> = (events_per_class..2 * events_per_class).collect();
    signal.shuffle(&mut rng);
    background.shuffle(&mut rng);
    let signal_train = n_train.div_ceil(2);
    let background_train = n_train - signal_train;
    let signal_test = n_test.div_ceil(2);
    let background_test = n_test - signal_test;
    let mut train: Vec<usize> = signal[..signal_train]
        .iter()
        .chain(&background[..background_train])
        .copied()
        .collect();
    let mut test: Vec<usize> = signal[signal_train..signal_train + signal_test]
        .iter()
        .chain(&background[background_train..background_train + background_test])
        .copied()
        .collect();
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

fn select<T: Real>(pool: &[Event<T>], indices: &[usize]) -> Vec<Event<T>> {
    indices.iter().map(|&i| pool[i].clone()).collect()
}

fn labels_of<T: Real>(events: &[Event<T>]) -> Result<Vec<i8>> {
    events
        .iter()
        .map(|e| e.label.ok_or(Error::EmptyInput("unlabeled event in a training split")))
        .collect()
}

fn evaluate_scores<T: Real>(scores: &[T], truth: &[i8]) -> Result<(T, T)> {
    let predicted: Vec<u8> = scores
        .iter()
        .map(|&s| if s >= T::zero() { 1u8 } else { 0u8 })
        .collect();
    let truth_binary: Vec<u8> = truth.iter().map(|&l| u8::from(l > 0)).collect();
    let acc = accuracy(&predicted, &truth_binary)?;
    let signal_mask: Vec<bool> = truth.iter().map(|&l| l > 0).collect();
    let auc = auc_from_scores(scores, &signal_mask)?;
    Ok((acc, auc))
}

/// Train, retrying once with a PSD-restoring diagonal shift if the solver
/// fails to converge on a shot-noisy kernel.
fn train_with_repair<T: Real>(
    gram: &mut crate::kernel::KernelMatrix<T>,
    labels: &[i8],
    config: &TrainConfig<T>,
) -> Result<(SvmModel<T>, Option<T>)> {
    let model = train(gram, labels, config)?;
    if model.converged {
        return Ok((model, None));
    }
    match gram.psd_shift() {
        Some(shift) => {
            gram.shift_diagonal(shift);
            let model = train(gram, labels, config)?;
            Ok((model, Some(shift)))
        }
        None => Ok((model, None)),
    }
}

fn run_repeat<T: Real>(
    cfg: &ExperimentConfig<T>,
    pool: &[Event<T>],
    repeat: usize,
    out_dir: &Path,
) -> Result<RepeatOutput<T>> {
    let (train_idx, test_idx) = draw_split(
        cfg.seed,
        repeat,
        cfg.gen.events_per_class,
        cfg.splits.n_train,
        cfg.splits.n_test,
    );
    let train_events = select(pool, &train_idx);
    let test_events = select(pool, &test_idx);
    let train_labels = labels_of(&train_events)?;
    let test_labels = labels_of(&test_events)?;

    let train_boosted = boost_all(&train_events)?;
    let test_boosted = boost_all(&test_events)?;
    let p_max = compute_p_max(&[&train_boosted, &test_boosted])?;
    let train_features = featurize(&train_boosted, p_max)?;
    let test_features = featurize(&test_boosted, p_max)?;

    let repeat_dir = out_dir.join(format!("repeat_{repeat:03}"));
    fs::create_dir_all(&repeat_dir)?;
    write_events(&repeat_dir.join("train.events"), &train_events)?;
    write_events(&repeat_dir.join("test.events"), &test_events)?;
    let train_label_options: Vec<Option<i8>> = train_labels.iter().map(|&l| Some(l)).collect();
    let test_label_options: Vec<Option<i8>> = test_labels.iter().map(|&l| Some(l)).collect();
    write_features(&repeat_dir.join("train.features"), &train_features, &train_label_options, p_max)?;
    write_features(&repeat_dir.join("test.features"), &test_features, &test_label_options, p_max)?;

    // Quantum kernel path.
    let n_qubits = cfg.encoder.n_qubits_for(train_features[0].values.len())?;
    let noise = if cfg.noise_enabled {
        Some(NoiseModel::uniform(
            n_qubits,
            cfg.noise_p1,
            cfg.noise_p2,
            cfg.noise_readout_flip,
            cfg.noise_readout_flip,
        ))
    } else {
        None
    };
    let calibration = if cfg.mitigation_enabled {
        let mode = cfg.mitigation_mode.unwrap_or_else(|| CalibrationMode::default_for(n_qubits));
        Some(calibrate(
            n_qubits,
            cfg.calibration_shots,
            derive_seed(cfg.seed, "calibration", repeat as u64),
            noise.as_ref().expect("mitigation requires noise"),
            mode,
        )?)
    } else {
        None
    };
    let gram_job = KernelJob {
        shots: cfg.shots,
        seed: derive_seed(cfg.seed, "gram", repeat as u64),
        noise: noise.clone(),
        calibration: calibration.clone(),
    };
    let cross_job = KernelJob {
        shots: cfg.shots,
        seed: derive_seed(cfg.seed, "cross", repeat as u64),
        noise,
        calibration,
    };
    let mut gram = gram_matrix(&train_features, &cfg.encoder, &gram_job, None)?;
    let cross = cross_gram(&test_features, &train_features, &cfg.encoder, &cross_job)?;
    write_kernel_matrix(&repeat_dir.join("gram.qkm"), &gram)?;
    write_cross_matrix(&repeat_dir.join("cross.qkm"), &cross)?;

    let (model, diagonal_shift) = train_with_repair(&mut gram, &train_labels, &cfg.svm)?;
    write_model(&repeat_dir.join("model.svm"), &model)?;
    let scores = decision_function(&model, &cross)?;
    let (acc, auc) = evaluate_scores(&scores, &test_labels)?;
    let signal_mask: Vec<bool> = test_labels.iter().map(|&l| l > 0).collect();
    write_roc_csv(&repeat_dir.join("roc_qsvm.csv"), &roc_curve(&scores, &signal_mask)?)?;
    let qsvm = RepeatRecord { accuracy: acc, auc, p_max, diagonal_shift };

    // RBF baseline on identical splits and features.
    let mut baselines = Vec::with_capacity(cfg.baseline_sigmas.len());
    for &sigma in &cfg.baseline_sigmas {
        let rbf_k = rbf_gram(&train_features, sigma)?;
        let rbf_x = rbf_cross(&test_features, &train_features, sigma)?;
        let rbf_model = train(&rbf_k, &train_labels, &cfg.svm)?;
        let rbf_scores = decision_function(&rbf_model, &rbf_x)?;
        let (rbf_acc, rbf_auc) = evaluate_scores(&rbf_scores, &test_labels)?;
        write_roc_csv(
            &repeat_dir.join(format!("roc_rbf_sigma_{sigma}.csv")),
            &roc_curve(&rbf_scores, &signal_mask)?,
        )?;
        let (predicted, _) = predict(&rbf_model, &rbf_x)?;
        debug_assert_eq!(predicted.len(), test_labels.len());
        baselines.push(RepeatRecord { accuracy: rbf_acc, auc: rbf_auc, p_max, diagonal_shift: None });
    }

    Ok(RepeatOutput { qsvm, baselines })
}

fn summarise<T: Real>(name: String, repeats: Vec<RepeatRecord<T>>) -> MethodSummary<T> {
    let accuracies: Vec<T> = repeats.iter().map(|r| r.accuracy).collect();
    let aucs: Vec<T> = repeats.iter().map(|r| r.auc).collect();
    let (mean_accuracy, stderr_accuracy) = mean_and_stderr(&accuracies);
    let (mean_auc, stderr_auc) = mean_and_stderr(&aucs);
    MethodSummary { name, repeats, mean_accuracy, stderr_accuracy, mean_auc, stderr_auc }
}

fn write_summary_csv<T: Real>(path: &Path, cfg: &ExperimentConfig<T>, methods: &[MethodSummary<T>]) -> Result<()> {
    use std::io::Write;
    let mut writer = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(writer, "method,repeat,n_train,n_test,p_max,accuracy,auc")?;
    for method in methods {
        for (r, record) in method.repeats.iter().enumerate() {
            writeln!(
                writer,
                "{},{},{},{},{},{},{}",
                method.name, r, cfg.splits.n_train, cfg.splits.n_test, record.p_max, record.accuracy, record.auc
            )?;
        }
        writeln!(
            writer,
            "{},mean,{},{},,{},{}",
            method.name, cfg.splits.n_train, cfg.splits.n_test, method.mean_accuracy, method.mean_auc
        )?;
        writeln!(
            writer,
            "{},stderr,{},{},,{},{}",
            method.name, cfg.splits.n_train, cfg.splits.n_test, method.stderr_accuracy, method.stderr_auc
        )?;
    }
    writer.flush()?;
    Ok(())
}

/// Run the full protocol into `out_dir` and return the summary.
pub fn run_experiment<T: Real>(cfg: &ExperimentConfig<T>, out_dir: &Path) -> Result<ExperimentSummary<T>> {
    cfg.validate()?;
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("config.resolved"), cfg.serialize())?;

    let pool = generate_dataset(&cfg.gen)?;
    write_events(&out_dir.join("pool.events"), &pool)?;

    let outputs: Vec<RepeatOutput<T>> = (0..cfg.splits.n_repeats)
        .into_par_iter()
        .map(|repeat| run_repeat(cfg, &pool, repeat, out_dir))
        .collect::<Result<_>>()?;

    let mut methods = Vec::with_capacity(1 + cfg.baseline_sigmas.len());
    methods.push(summarise(
        cfg.encoder.tag(),
        outputs.iter().map(|o| o.qsvm.clone()).collect(),
    ));
    for (k, &sigma) in cfg.baseline_sigmas.iter().enumerate() {
        methods.push(summarise(
            rbf_tag(sigma),
            outputs.iter().map(|o| o.baselines[k].clone()).collect(),
        ));
    }

    write_summary_csv(&out_dir.join("summary.csv"), cfg, &methods)?;
    Ok(ExperimentSummary { methods, out_dir: out_dir.to_path_buf() })
}

/// Vary one config key over the given values, running each into its own
/// subdirectory, and write one aggregate row per value and method.
pub fn sweep<T: Real>(
    base: &ExperimentConfig<T>,
    axis: &str,
    values: &[String],
    out_dir: &Path,
) -> Result<Vec<(String, ExperimentSummary<T>)>> {
    if values.is_empty() {
        return Err(Error::BadConfig("sweep needs at least one value".into()));
    }
    fs::create_dir_all(out_dir)?;
    let mut results = Vec::with_capacity(values.len());
    for value in values {
        let mut cfg = base.clone();
        cfg.set(axis, value)?;
        let safe_value: String = value
            .chars()
            .map(|c| if c.is_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
            .collect();
        let sub_dir = out_dir.join(format!("{}={}", axis.replace('.', "_"), safe_value));
        let summary = run_experiment(&cfg, &sub_dir)?;
        results.push((value.clone(), summary));
    }

    use std::io::Write;
    let mut writer = std::io::BufWriter::new(fs::File::create(out_dir.join("sweep_summary.csv"))?);
    writeln!(writer, "axis,value,method,mean_accuracy,stderr_accuracy,mean_auc,stderr_auc")?;
    for (value, summary) in &results {
        for method in &summary.methods {
            writeln!(
                writer,
                "{axis},{value},{},{},{},{},{}",
                method.name,
                method.mean_accuracy,
                method.stderr_accuracy,
                method.mean_auc,
                method.stderr_auc
            )?;
        }
    }
    writer.flush()?;
    Ok(results)
}
