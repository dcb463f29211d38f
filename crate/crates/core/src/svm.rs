//! Soft-margin SVM on precomputed kernels.
//!
//! Training solves the dual `min ½ αᵀQα − eᵀα` subject to `yᵀα = 0` and
//! `0 ≤ α ≤ C`, with `Q_ij = y_i y_j K_ij`, by sequential minimal
//! optimisation with deterministic maximal-violating-pair selection (ties
//! break to the lowest index), so identical inputs always produce identical
//! models. The bias is averaged over free support vectors, falling back to
//! the midpoint of the KKT-feasible interval when every multiplier sits at a
//! bound.

use crate::error::{Error, Result};
use crate::kernel::{matrix_hash, CrossMatrix, KernelMatrix};
use crate::scalar::{real, Real};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Solver configuration: box constraint, KKT violation threshold and the cap
/// on pair updates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig<T = f64> {
    pub c: T,
    pub tolerance: T,
    pub max_passes: usize,
}

impl<T: Real> Default for TrainConfig<T> {
    fn default() -> Self {
        TrainConfig {
            c: T::one(),
            tolerance: real(1e-3),
            max_passes: 1_000_000,
        }
    }
}

impl<T: Real> TrainConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.c <= T::zero() || self.tolerance <= T::zero() || self.max_passes == 0 {
            return Err(Error::BadConfig(
                "svm config requires c > 0, tolerance > 0, max_passes >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// A trained classifier over a precomputed kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel<T = f64> {
    pub alphas: Vec<T>,
    pub labels: Vec<i8>,
    pub support_indices: Vec<usize>,
    pub bias: T,
    pub c: T,
    pub tolerance: T,
    /// Content hash of the training kernel, so predictions can be matched to
    /// the right Gram matrix.
    pub kernel_hash: u64,
    /// False when the KKT gap was still above tolerance at `max_passes`;
    /// callers then typically shift the kernel diagonal and retrain.
    pub converged: bool,
    /// Dual objective recorded once per sweep (n updates); non-increasing.
    pub objective_trace: Vec<T>,
}

impl<T: Real> SvmModel<T> {
    /// `½ αᵀQα − eᵀα` for this model against its training kernel.
    pub fn objective(&self, kernel: &KernelMatrix<T>) -> T {
        objective_value(kernel, &self.labels, &self.alphas)
    }
}

fn objective_value<T: Real>(kernel: &KernelMatrix<T>, labels: &[i8], alphas: &[T]) -> T {
    let n = alphas.len();
    let mut quad = T::zero();
    for i in 0..n {
        if alphas[i] == T::zero() {
            continue;
        }
        let yi = label_sign::<T>(labels[i]);
        for j in 0..n {
            if alphas[j] == T::zero() {
                continue;
            }
            quad += alphas[i] * alphas[j] * yi * label_sign::<T>(labels[j]) * kernel.get(i, j);
        }
    }
    let linear: T = alphas.iter().cloned().sum();
    quad * real::<T>(0.5) - linear
}

#[inline]
fn label_sign<T: Real>(label: i8) -> T {
    if label > 0 {
        T::one()
    } else {
        -T::one()
    }
}

/// Train by SMO on a precomputed kernel.
pub fn train<T: Real>(
    kernel: &KernelMatrix<T>,
    labels: &[i8],
    config: &TrainConfig<T>,
) -> Result<SvmModel<T>> {
    config.validate()?;
    let n = labels.len();
    if kernel.n() != n {
        return Err(Error::DimensionMismatch { expected: kernel.n(), actual: n });
    }
    for &label in labels {
        if label != 1 && label != -1 {
            return Err(Error::BadLabel(label));
        }
    }
    if labels.iter().all(|&l| l == labels[0]) {
        return Err(Error::SingleClass);
    }
    for i in 0..n {
        for j in 0..n {
            if !kernel.get(i, j).is_finite() {
                return Err(Error::NonFiniteKernel { i, j });
            }
        }
    }

    let c = config.c;
    let y: Vec<T> = labels.iter().map(|&l| label_sign(l)).collect();
    let mut alphas = vec![T::zero(); n];
    // Gradient of the dual objective: g = Qα − e, starting from α = 0.
    let mut gradient = vec![-T::one(); n];
    let mut objective_trace = Vec::new();
    let mut converged = false;
    let tiny: T = real(1e-12);

    let mut updates = 0usize;
    while updates < config.max_passes {
        // Maximal violating pair: i maximises -y g over the "up" set, j
        // minimises it over the "down" set.
        let mut i_best: Option<(usize, T)> = None;
        let mut j_best: Option<(usize, T)> = None;
        for k in 0..n {
            let value = -y[k] * gradient[k];
            let in_up = (y[k] > T::zero() && alphas[k] < c) || (y[k] < T::zero() && alphas[k] > T::zero());
            let in_down = (y[k] > T::zero() && alphas[k] > T::zero()) || (y[k] < T::zero() && alphas[k] < c);
            if in_up && i_best.map_or(true, |(_, best)| value > best) {
                i_best = Some((k, value));
            }
            if in_down && j_best.map_or(true, |(_, best)| value < best) {
                j_best = Some((k, value));
            }
        }
        let ((i, m_value), (j, m_lower)) = match (i_best, j_best) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                converged = true;
                break;
            }
        };
        if m_value - m_lower <= config.tolerance {
            converged = true;
            break;
        }

        // Exact minimisation along α_i += y_i δ, α_j -= y_j δ within the box.
        let mut curvature = kernel.get(i, i) + kernel.get(j, j) - real::<T>(2.0) * kernel.get(i, j);
        if curvature <= tiny {
            curvature = tiny;
        }
        let mut delta = (m_value - m_lower) / curvature;
        let (lo_i, hi_i) = if y[i] > T::zero() {
            (-alphas[i], c - alphas[i])
        } else {
            (alphas[i] - c, alphas[i])
        };
        let (lo_j, hi_j) = if y[j] > T::zero() {
            (alphas[j] - c, alphas[j])
        } else {
            (-alphas[j], c - alphas[j])
        };
        delta = delta.min(hi_i).min(hi_j).max(lo_i).max(lo_j);

        alphas[i] += y[i] * delta;
        alphas[j] -= y[j] * delta;
        // Clip exactly onto the box to keep bound membership crisp.
        alphas[i] = alphas[i].max(T::zero()).min(c);
        alphas[j] = alphas[j].max(T::zero()).min(c);
        for k in 0..n {
            gradient[k] += y[k] * delta * (kernel.get(k, i) - kernel.get(k, j));
        }

        updates += 1;
        if updates % n == 0 {
            objective_trace.push(objective_value(kernel, labels, &alphas));
        }
    }
    objective_trace.push(objective_value(kernel, labels, &alphas));

    // Bias: average y_i - f_i over free support vectors, else the midpoint
    // of the interval allowed by the bound KKT conditions.
    let score_without_bias = |k: usize| -> T { y[k] * (gradient[k] + T::one()) };
    let mut free_sum = T::zero();
    let mut free_count = 0usize;
    let mut lower = T::neg_infinity();
    let mut upper = T::infinity();
    for k in 0..n {
        let target = y[k] - score_without_bias(k);
        let at_zero = alphas[k] <= T::zero();
        let at_c = alphas[k] >= c;
        if !at_zero && !at_c {
            free_sum += target;
            free_count += 1;
        } else if (y[k] > T::zero() && at_zero) || (y[k] < T::zero() && at_c) {
            lower = lower.max(target);
        } else {
            upper = upper.min(target);
        }
    }
    let bias = if free_count > 0 {
        free_sum / T::from_usize(free_count).unwrap()
    } else if lower.is_finite() && upper.is_finite() {
        (lower + upper) * real(0.5)
    } else if lower.is_finite() {
        lower
    } else {
        upper
    };

    let support_indices = (0..n).filter(|&k| alphas[k] > T::zero()).collect();
    Ok(SvmModel {
        alphas,
        labels: labels.to_vec(),
        support_indices,
        bias,
        c,
        tolerance: config.tolerance,
        kernel_hash: matrix_hash(kernel),
        converged,
        objective_trace,
    })
}

/// Raw decision scores `Σ_i α_i y_i K(x_i, x) + b` for each cross-kernel row.
pub fn decision_function<T: Real>(model: &SvmModel<T>, cross: &CrossMatrix<T>) -> Result<Vec<T>> {
    if cross.cols() != model.alphas.len() {
        return Err(Error::DimensionMismatch {
            expected: model.alphas.len(),
            actual: cross.cols(),
        });
    }
    Ok((0..cross.rows())
        .map(|t| {
            let row = cross.row(t);
            let mut score = model.bias;
            for &i in &model.support_indices {
                score += model.alphas[i] * label_sign::<T>(model.labels[i]) * row[i];
            }
            score
        })
        .collect())
}

/// Class labels (0 background, 1 signal; exact ties go to signal) plus a
/// logistic squash of the raw score to [0, 1] for reporting. The squash is
/// strictly monotone, so rank statistics such as AUC are unchanged.
pub fn predict<T: Real>(model: &SvmModel<T>, cross: &CrossMatrix<T>) -> Result<(Vec<u8>, Vec<T>)> {
    let scores = decision_function(model, cross)?;
    let labels = scores
        .iter()
        .map(|&s| if s >= T::zero() { 1u8 } else { 0u8 })
        .collect();
    let squashed = scores
        .iter()
        .map(|&s| T::one() / (T::one() + (-s).exp()))
        .collect();
    Ok((labels, squashed))
}

// --- model file format -------------------------------------------------------
//
// Plain text, one `key,value` pair per line after a version header, then one
// `sv,<index>,<alpha>,<y>` line per support vector. Floats use the shortest
// round-trip decimal representation, so reading a written model is exact.

pub fn write_model<T: Real>(path: &Path, model: &SvmModel<T>) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    writeln!(writer, "# qksvm-model v1")?;
    writeln!(writer, "c,{}", model.c)?;
    writeln!(writer, "tolerance,{}", model.tolerance)?;
    writeln!(writer, "bias,{}", model.bias)?;
    writeln!(writer, "kernel_hash,{:016x}", model.kernel_hash)?;
    writeln!(writer, "converged,{}", u8::from(model.converged))?;
    writeln!(writer, "n_train,{}", model.alphas.len())?;
    for &i in &model.support_indices {
        writeln!(writer, "sv,{},{},{}", i, model.alphas[i], model.labels[i])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_model<T: Real>(path: &Path) -> Result<SvmModel<T>> {
    let file = BufReader::new(File::open(path)?);
    let path_string = path.display().to_string();
    let parse_err = |line: usize, msg: &str| Error::Parse {
        path: path_string.clone(),
        line,
        msg: msg.to_string(),
    };

    let mut lines = file.lines().enumerate();
    let (_, first) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file"))?;
    if first?.trim() != "# qksvm-model v1" {
        return Err(parse_err(1, "missing `# qksvm-model v1` header"));
    }

    let mut c: Option<T> = None;
    let mut tolerance: Option<T> = None;
    let mut bias: Option<T> = None;
    let mut kernel_hash: Option<u64> = None;
    let mut converged = true;
    let mut n_train: Option<usize> = None;
    let mut support: Vec<(usize, T, i8)> = Vec::new();

    for (index, line) in lines {
        let line_no = index + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let parse_float = |s: &str| -> Result<T> {
            s.trim()
                .parse::<f64>()
                .ok()
                .and_then(T::from_f64)
                .ok_or_else(|| parse_err(line_no, "bad float"))
        };
        match fields[0] {
            "c" if fields.len() == 2 => c = Some(parse_float(fields[1])?),
            "tolerance" if fields.len() == 2 => tolerance = Some(parse_float(fields[1])?),
            "bias" if fields.len() == 2 => bias = Some(parse_float(fields[1])?),
            "kernel_hash" if fields.len() == 2 => {
                kernel_hash = Some(
                    u64::from_str_radix(fields[1].trim(), 16)
                        .map_err(|_| parse_err(line_no, "bad kernel hash"))?,
                )
            }
            "converged" if fields.len() == 2 => {
                converged = fields[1].trim() != "0";
            }
            "n_train" if fields.len() == 2 => {
                n_train = Some(
                    fields[1]
                        .trim()
                        .parse()
                        .map_err(|_| parse_err(line_no, "bad n_train"))?,
                )
            }
            "sv" if fields.len() == 4 => {
                let index: usize = fields[1]
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(line_no, "bad support index"))?;
                let alpha = parse_float(fields[2])?;
                let label: i8 = fields[3]
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(line_no, "bad label"))?;
                support.push((index, alpha, label));
            }
            _ => return Err(parse_err(line_no, "unrecognised record")),
        }
    }

    let n = n_train.ok_or_else(|| parse_err(0, "missing n_train"))?;
    let mut alphas = vec![T::zero(); n];
    let mut labels = vec![1i8; n];
    let mut support_indices = Vec::with_capacity(support.len());
    for (index, alpha, label) in support {
        if index >= n {
            return Err(parse_err(0, "support index out of range"));
        }
        alphas[index] = alpha;
        labels[index] = label;
        support_indices.push(index);
    }
    Ok(SvmModel {
        alphas,
        labels,
        support_indices,
        bias: bias.ok_or_else(|| parse_err(0, "missing bias"))?,
        c: c.ok_or_else(|| parse_err(0, "missing c"))?,
        tolerance: tolerance.ok_or_else(|| parse_err(0, "missing tolerance"))?,
        kernel_hash: kernel_hash.ok_or_else(|| parse_err(0, "missing kernel_hash"))?,
        converged,
        objective_trace: Vec::new(),
    })
}

#[cfg(test)]
pub(crate) mod brute_force {
    //! Independent dense QP oracle for tests: projected gradient descent with
    //! exact projection onto `{0 <= α <= C, yᵀα = 0}` via bisection on the
    //! equality multiplier. Written against the dual formulation directly,
    //! sharing no code with the SMO path.

    pub fn project(alpha_tilde: &[f64], y: &[f64], c: f64) -> Vec<f64> {
        let clip = |nu: f64| -> Vec<f64> {
            alpha_tilde
                .iter()
                .zip(y.iter())
                .map(|(&a, &yi)| (a - nu * yi).clamp(0.0, c))
                .collect()
        };
        let balance = |alpha: &[f64]| -> f64 {
            alpha.iter().zip(y.iter()).map(|(&a, &yi)| a * yi).sum()
        };
        let bound = alpha_tilde.iter().fold(c + 1.0, |m, &a| m.max(a.abs())) + c + 1.0;
        let (mut lo, mut hi) = (-bound, bound);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if balance(&clip(mid)) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        clip(0.5 * (lo + hi))
    }

    pub fn objective(kernel: &[Vec<f64>], y: &[f64], alpha: &[f64]) -> f64 {
        let n = alpha.len();
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += alpha[i] * alpha[j] * y[i] * y[j] * kernel[i][j];
            }
        }
        0.5 * quad - alpha.iter().sum::<f64>()
    }

    /// Minimise the dual by projected gradient with a conservative step.
    pub fn solve(kernel: &[Vec<f64>], y: &[f64], c: f64, iterations: usize) -> Vec<f64> {
        let n = y.len();
        let lipschitz = (0..n)
            .map(|i| (0..n).map(|j| kernel[i][j].abs()).sum::<f64>())
            .fold(1.0f64, f64::max);
        let step = 1.0 / lipschitz;
        let mut alpha = project(&vec![0.0; n], y, c);
        for _ in 0..iterations {
            let gradient: Vec<f64> = (0..n)
                .map(|i| {
                    y[i] * (0..n)
                        .map(|j| y[j] * alpha[j] * kernel[i][j])
                        .sum::<f64>()
                        - 1.0
                })
                .collect();
            let stepped: Vec<f64> = alpha
                .iter()
                .zip(gradient.iter())
                .map(|(&a, &g)| a - step * g)
                .collect();
            let next = project(&stepped, y, c);
            let moved: f64 = next
                .iter()
                .zip(alpha.iter())
                .map(|(a, b)| (a - b).abs())
                .sum();
            alpha = next;
            if moved < 1e-15 {
                break;
            }
        }
        alpha
    }
}
