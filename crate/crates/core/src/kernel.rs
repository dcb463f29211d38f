//! Quantum kernel entries and Gram matrices, exact and shot-sampled, plus
//! the classical RBF baseline.
//!
//! The exact entry is `|<psi(x_i)|psi(x_j)>|^2` from two statevector builds.
//! The sampled entry runs the compute-uncompute circuit `U(x_j)` followed by
//! `U†(x_i)` and reports the fraction of all-zeros outcomes; with a noise
//! model the sampling routes through the stochastic simulator, and with a
//! calibration matrix the counts are mitigated before the all-zeros
//! probability is read off.
//!
//! Gram computations are pure per pair: pair `(i, j)` derives its RNG seed
//! from `(seed, i, j)`, so parallel evaluation order cannot change results.
//! Long runs can checkpoint completed upper-triangle rows and resume.

use crate::encoders::{build_circuit, encode_state, EncoderSpec};
use crate::error::{Error, Result};
use crate::linalg;
use crate::noise::{mitigate, noisy_sample, CalibrationMatrix, NoiseModel};
use crate::preprocess::FeatureVector;
use crate::rng::{fnv1a64, pair_seed};
use crate::scalar::{real, Real};
use crate::statevec::{Circuit, Statevector};
use rayon::prelude::*;
use std::fs::{File, OpenOptions};
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::Path;

/// Provenance carried by every kernel matrix (and its file header).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelMeta {
    pub encoder_tag: String,
    /// 0 means the exact statevector path.
    pub shots: u64,
    pub seed: u64,
}

/// Symmetric N x N kernel matrix, stored dense row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix<T = f64> {
    n: usize,
    entries: Vec<T>,
    pub meta: KernelMeta,
}

impl<T: Real> KernelMatrix<T> {
    pub fn from_entries(n: usize, entries: Vec<T>, meta: KernelMeta) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, actual: entries.len() });
        }
        Ok(KernelMatrix { n, entries, meta })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    /// Smallest eigenvalue (Jacobi); the PSD diagnostic for shot-noisy kernels.
    pub fn min_eigenvalue(&self) -> T {
        linalg::symmetric_eigenvalues(&self.entries, self.n)[0]
    }

    /// Diagonal shift `K + lambda I`, the default repair for indefinite
    /// sampled kernels.
    pub fn shift_diagonal(&mut self, lambda: T) {
        for i in 0..self.n {
            self.entries[i * self.n + i] += lambda;
        }
    }

    /// The shift `max(0, -lambda_min + 1e-8)` that makes the matrix PSD, or
    /// `None` when it already is.
    pub fn psd_shift(&self) -> Option<T> {
        let min = self.min_eigenvalue();
        if min < T::zero() {
            Some(-min + real(1e-8))
        } else {
            None
        }
    }
}

/// Rectangular test x train kernel block.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossMatrix<T = f64> {
    rows: usize,
    cols: usize,
    entries: Vec<T>,
    pub meta: KernelMeta,
}

impl<T: Real> CrossMatrix<T> {
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<T>, meta: KernelMeta) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, actual: entries.len() });
        }
        Ok(CrossMatrix { rows, cols, entries, meta })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.entries[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }
}

/// How kernel entries are to be evaluated.
#[derive(Debug, Clone, Default)]
pub struct KernelJob<T = f64> {
    /// 0 selects the exact path; otherwise shots per entry.
    pub shots: u64,
    pub seed: u64,
    pub noise: Option<NoiseModel<T>>,
    pub calibration: Option<CalibrationMatrix<T>>,
}

impl<T: Real> KernelJob<T> {
    pub fn exact() -> Self {
        KernelJob { shots: 0, seed: 0, noise: None, calibration: None }
    }

    pub fn sampled(shots: u64, seed: u64) -> Self {
        KernelJob { shots, seed, noise: None, calibration: None }
    }

    pub fn is_exact(&self) -> bool {
        self.shots == 0
    }
}

/// The compute-uncompute circuit `U†(x_i) U(x_j)` whose all-zeros probability
/// is the kernel entry.
pub fn kernel_estimation_circuit<T: Real>(
    xi: &FeatureVector<T>,
    xj: &FeatureVector<T>,
    spec: &EncoderSpec,
) -> Result<Circuit<T>> {
    if xi.values.len() != xj.values.len() {
        return Err(Error::DimensionMismatch {
            expected: xi.values.len(),
            actual: xj.values.len(),
        });
    }
    let mut circuit = build_circuit(xj, spec)?;
    circuit.extend(&build_circuit(xi, spec)?.adjoint())?;
    Ok(circuit)
}

/// Exact kernel entry `|<psi(x_i)|psi(x_j)>|^2` via two statevector builds.
pub fn kernel_exact<T: Real>(
    xi: &FeatureVector<T>,
    xj: &FeatureVector<T>,
    spec: &EncoderSpec,
) -> Result<T> {
    if xi.values.len() != xj.values.len() {
        return Err(Error::DimensionMismatch {
            expected: xi.values.len(),
            actual: xj.values.len(),
        });
    }
    let a = encode_state(xi, spec)?;
    let b = encode_state(xj, spec)?;
    Ok(a.inner_product(&b)?.norm_sqr())
}

/// Shot-sampled kernel entry: the fraction of all-zeros measurements of the
/// compute-uncompute circuit, optionally under a noise model.
pub fn kernel_sampled<T: Real>(
    xi: &FeatureVector<T>,
    xj: &FeatureVector<T>,
    spec: &EncoderSpec,
    shots: u64,
    seed: u64,
    noise: Option<&NoiseModel<T>>,
) -> Result<T> {
    let counts = kernel_counts(xi, xj, spec, shots, seed, noise)?;
    let zeros = counts.get(&0).copied().unwrap_or(0);
    Ok(T::from_u64(zeros).unwrap() / T::from_u64(shots).unwrap())
}

/// As [`kernel_sampled`], but the measured distribution is mitigated with the
/// calibration matrix before the all-zeros probability is read off.
pub fn kernel_mitigated<T: Real>(
    xi: &FeatureVector<T>,
    xj: &FeatureVector<T>,
    spec: &EncoderSpec,
    shots: u64,
    seed: u64,
    noise: Option<&NoiseModel<T>>,
    calibration: &CalibrationMatrix<T>,
) -> Result<T> {
    let counts = kernel_counts(xi, xj, spec, shots, seed, noise)?;
    let mitigated = mitigate(&counts, calibration)?;
    Ok(mitigated.probabilities[0])
}

fn kernel_counts<T: Real>(
    xi: &FeatureVector<T>,
    xj: &FeatureVector<T>,
    spec: &EncoderSpec,
    shots: u64,
    seed: u64,
    noise: Option<&NoiseModel<T>>,
) -> Result<std::collections::BTreeMap<usize, u64>> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let circuit = kernel_estimation_circuit(xi, xj, spec)?;
    match noise {
        None => Statevector::zero(circuit.n_qubits())?
            .apply_circuit(&circuit)?
            .sample_counts(shots, seed),
        Some(model) => noisy_sample(&circuit, shots, seed, model),
    }
}

fn entry_with_job<T: Real>(
    xi: &FeatureVector<T>,
    xj: &FeatureVector<T>,
    spec: &EncoderSpec,
    job: &KernelJob<T>,
    seed: u64,
) -> Result<T> {
    let value = if job.is_exact() {
        kernel_exact(xi, xj, spec)?
    } else {
        match &job.calibration {
            Some(cal) => {
                kernel_mitigated(xi, xj, spec, job.shots, seed, job.noise.as_ref(), cal)?
            }
            None => kernel_sampled(xi, xj, spec, job.shots, seed, job.noise.as_ref())?,
        }
    };
    Ok(value)
}

fn wrap_entry<T: Real>(i: usize, j: usize, result: Result<T>) -> Result<T> {
    match result {
        Ok(value) if value.is_finite() => Ok(value),
        Ok(_) => Err(Error::NonFiniteKernel { i, j }),
        Err(source) => Err(Error::KernelEntry { i, j, source: Box::new(source) }),
    }
}

fn validate_features<T: Real>(xs: &[FeatureVector<T>], what: &'static str) -> Result<usize> {
    if xs.is_empty() {
        return Err(Error::EmptyInput(what));
    }
    let len = xs[0].values.len();
    for x in xs {
        if x.values.len() != len {
            return Err(Error::DimensionMismatch { expected: len, actual: x.values.len() });
        }
    }
    Ok(len)
}

/// Full symmetric Gram matrix over `xs`.
///
/// Each unordered pair is computed once and mirrored, so symmetry is exact by
/// construction. In exact mode the diagonal is set to 1 identically. With a
/// checkpoint path, completed upper-triangle rows are appended as they finish
/// and a matching interrupted run resumes after the last complete row.
pub fn gram_matrix<T: Real>(
    xs: &[FeatureVector<T>],
    spec: &EncoderSpec,
    job: &KernelJob<T>,
    checkpoint: Option<&Path>,
) -> Result<KernelMatrix<T>> {
    validate_features(xs, "gram over zero feature vectors")?;
    spec.validate()?;
    let n = xs.len();
    let meta = KernelMeta { encoder_tag: spec.tag(), shots: job.shots, seed: job.seed };

    let mut entries = vec![T::zero(); n * n];
    let mut first_row = 0usize;
    let mut sink = match checkpoint {
        Some(path) => {
            let (sink, resumed_rows) = CheckpointWriter::open(path, n, &meta)?;
            for (i, row) in resumed_rows.iter().enumerate() {
                for (offset, &value) in row.iter().enumerate() {
                    let j = i + offset;
                    entries[i * n + j] = real(value);
                    entries[j * n + i] = real(value);
                }
            }
            first_row = resumed_rows.len();
            Some(sink)
        }
        None => None,
    };

    // Exact mode encodes every state once; pairs are then inner products.
    let states: Option<Vec<Statevector<T>>> = if job.is_exact() {
        Some(
            xs.par_iter()
                .map(|x| encode_state(x, spec))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };

    for i in first_row..n {
        let row: Vec<T> = (i..n)
            .into_par_iter()
            .map(|j| {
                let value = if let Some(states) = &states {
                    if i == j {
                        Ok(T::one())
                    } else {
                        states[i].inner_product(&states[j]).map(|ip| ip.norm_sqr())
                    }
                } else {
                    entry_with_job(&xs[i], &xs[j], spec, job, pair_seed(job.seed, i, j))
                };
                wrap_entry(i, j, value)
            })
            .collect::<Result<Vec<_>>>()?;
        for (offset, &value) in row.iter().enumerate() {
            let j = i + offset;
            entries[i * n + j] = value;
            entries[j * n + i] = value;
        }
        if let Some(sink) = sink.as_mut() {
            sink.append_row(&row)?;
        }
    }

    KernelMatrix::from_entries(n, entries, meta)
}

/// Rectangular kernel block between test and train feature sets.
pub fn cross_gram<T: Real>(
    x_test: &[FeatureVector<T>],
    x_train: &[FeatureVector<T>],
    spec: &EncoderSpec,
    job: &KernelJob<T>,
) -> Result<CrossMatrix<T>> {
    let len_test = validate_features(x_test, "cross gram with no test vectors")?;
    let len_train = validate_features(x_train, "cross gram with no train vectors")?;
    if len_test != len_train {
        return Err(Error::DimensionMismatch { expected: len_train, actual: len_test });
    }
    spec.validate()?;
    let rows = x_test.len();
    let cols = x_train.len();
    let meta = KernelMeta { encoder_tag: spec.tag(), shots: job.shots, seed: job.seed };

    let entries: Vec<T> = if job.is_exact() {
        let test_states = x_test
            .par_iter()
            .map(|x| encode_state(x, spec))
            .collect::<Result<Vec<_>>>()?;
        let train_states = x_train
            .par_iter()
            .map(|x| encode_state(x, spec))
            .collect::<Result<Vec<_>>>()?;
        (0..rows * cols)
            .into_par_iter()
            .map(|index| {
                let (t, r) = (index / cols, index % cols);
                wrap_entry(
                    t,
                    r,
                    test_states[t]
                        .inner_product(&train_states[r])
                        .map(|ip| ip.norm_sqr()),
                )
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        (0..rows * cols)
            .into_par_iter()
            .map(|index| {
                let (t, r) = (index / cols, index % cols);
                // Offset the row index so cross seeds never collide with the
                // symmetric Gram's (i, j) seeds for the same master seed.
                let seed = pair_seed(job.seed, t + (1 << 32), r);
                wrap_entry(t, r, entry_with_job(&x_test[t], &x_train[r], spec, job, seed))
            })
            .collect::<Result<Vec<_>>>()?
    };

    CrossMatrix::from_entries(rows, cols, entries, meta)
}

/// The classical RBF baseline kernel `exp(-|xi - xj|^2 / (2 sigma^2))`.
pub fn rbf_kernel<T: Real>(xi: &[T], xj: &[T], sigma: T) -> Result<T> {
    if sigma <= T::zero() {
        return Err(Error::NonPositiveSigma(sigma.to_f64().unwrap_or(f64::NAN)));
    }
    if xi.len() != xj.len() {
        return Err(Error::DimensionMismatch { expected: xi.len(), actual: xj.len() });
    }
    let dist_sqr: T = xi
        .iter()
        .zip(xj.iter())
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum();
    Ok((-dist_sqr / (real::<T>(2.0) * sigma * sigma)).exp())
}

pub fn rbf_tag<T: Real>(sigma: T) -> String {
    format!("rbf:sigma={sigma}")
}

/// RBF Gram matrix over the same feature vectors the quantum kernels see.
pub fn rbf_gram<T: Real>(xs: &[FeatureVector<T>], sigma: T) -> Result<KernelMatrix<T>> {
    validate_features(xs, "rbf gram over zero feature vectors")?;
    let n = xs.len();
    let mut entries = vec![T::zero(); n * n];
    for i in 0..n {
        entries[i * n + i] = T::one();
        for j in (i + 1)..n {
            let value = rbf_kernel(&xs[i].values, &xs[j].values, sigma)?;
            entries[i * n + j] = value;
            entries[j * n + i] = value;
        }
    }
    KernelMatrix::from_entries(
        n,
        entries,
        KernelMeta { encoder_tag: rbf_tag(sigma), shots: 0, seed: 0 },
    )
}

pub fn rbf_cross<T: Real>(
    x_test: &[FeatureVector<T>],
    x_train: &[FeatureVector<T>],
    sigma: T,
) -> Result<CrossMatrix<T>> {
    validate_features(x_test, "rbf cross with no test vectors")?;
    validate_features(x_train, "rbf cross with no train vectors")?;
    let rows = x_test.len();
    let cols = x_train.len();
    let mut entries = Vec::with_capacity(rows * cols);
    for t in x_test {
        for r in x_train {
            entries.push(rbf_kernel(&t.values, &r.values, sigma)?);
        }
    }
    CrossMatrix::from_entries(
        rows,
        cols,
        entries,
        KernelMeta { encoder_tag: rbf_tag(sigma), shots: 0, seed: 0 },
    )
}

// --- QKM1 binary format ----------------------------------------------------
//
// magic "QKM1" | layout u8 (0 dense, 1 upper-triangle checkpoint) | rows u64
// | cols u64 | shots u64 | seed u64 | tag_len u32 | tag utf-8 | payload of
// little-endian f64 values. Dense payload is row-major rows x cols; the
// checkpoint payload is the concatenation of completed upper-triangle rows
// (row i holds entries (i, i..n)).

const MAGIC: &[u8; 4] = b"QKM1";
const LAYOUT_DENSE: u8 = 0;
const LAYOUT_TRIANGLE: u8 = 1;

fn header_bytes(layout: u8, rows: u64, cols: u64, meta: &KernelMeta) -> Vec<u8> {
    let tag = meta.encoder_tag.as_bytes();
    let mut out = Vec::with_capacity(4 + 1 + 8 * 4 + 4 + tag.len());
    out.extend_from_slice(MAGIC);
    out.push(layout);
    out.extend_from_slice(&rows.to_le_bytes());
    out.extend_from_slice(&cols.to_le_bytes());
    out.extend_from_slice(&meta.shots.to_le_bytes());
    out.extend_from_slice(&meta.seed.to_le_bytes());
    out.extend_from_slice(&(tag.len() as u32).to_le_bytes());
    out.extend_from_slice(tag);
    out
}

struct Header {
    layout: u8,
    rows: usize,
    cols: usize,
    meta: KernelMeta,
    byte_len: usize,
}

fn read_header(reader: &mut impl Read, path: &Path) -> Result<Header> {
    let bad = |msg: &str| Error::BadFileFormat {
        path: path.display().to_string(),
        what: "QKM1 kernel",
        msg: msg.to_string(),
    };
    let mut magic = [0u8; 4];
    reader.read_exact(&mut magic).map_err(|_| bad("truncated header"))?;
    if &magic != MAGIC {
        return Err(bad("bad magic"));
    }
    let mut byte = [0u8; 1];
    reader.read_exact(&mut byte).map_err(|_| bad("truncated header"))?;
    let layout = byte[0];
    if layout != LAYOUT_DENSE && layout != LAYOUT_TRIANGLE {
        return Err(bad("unknown layout"));
    }
    let mut u64buf = [0u8; 8];
    let mut next_u64 = |reader: &mut dyn Read| -> Result<u64> {
        reader.read_exact(&mut u64buf).map_err(|_| bad("truncated header"))?;
        Ok(u64::from_le_bytes(u64buf))
    };
    let rows = next_u64(reader)? as usize;
    let cols = next_u64(reader)? as usize;
    let shots = next_u64(reader)?;
    let seed = next_u64(reader)?;
    let mut u32buf = [0u8; 4];
    reader.read_exact(&mut u32buf).map_err(|_| bad("truncated header"))?;
    let tag_len = u32::from_le_bytes(u32buf) as usize;
    let mut tag = vec![0u8; tag_len];
    reader.read_exact(&mut tag).map_err(|_| bad("truncated header"))?;
    let encoder_tag = String::from_utf8(tag).map_err(|_| bad("tag is not utf-8"))?;
    Ok(Header {
        layout,
        rows,
        cols,
        meta: KernelMeta { encoder_tag, shots, seed },
        byte_len: 4 + 1 + 32 + 4 + tag_len,
    })
}

fn write_payload<T: Real, W: Write>(writer: &mut W, entries: &[T]) -> Result<()> {
    for value in entries {
        writer.write_all(&value.to_f64().unwrap_or(f64::NAN).to_le_bytes())?;
    }
    Ok(())
}

fn serialize_dense<T: Real>(rows: usize, cols: usize, entries: &[T], meta: &KernelMeta) -> Vec<u8> {
    let mut out = header_bytes(LAYOUT_DENSE, rows as u64, cols as u64, meta);
    for value in entries {
        out.extend_from_slice(&value.to_f64().unwrap_or(f64::NAN).to_le_bytes());
    }
    out
}

/// Content hash of a kernel matrix, as recorded in trained-model files.
pub fn matrix_hash<T: Real>(matrix: &KernelMatrix<T>) -> u64 {
    fnv1a64(&serialize_dense(matrix.n, matrix.n, &matrix.entries, &matrix.meta))
}

pub fn write_kernel_matrix<T: Real>(path: &Path, matrix: &KernelMatrix<T>) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    writer.write_all(&header_bytes(LAYOUT_DENSE, matrix.n as u64, matrix.n as u64, &matrix.meta))?;
    write_payload(&mut writer, &matrix.entries)?;
    writer.flush()?;
    Ok(())
}

pub fn write_cross_matrix<T: Real>(path: &Path, matrix: &CrossMatrix<T>) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    writer.write_all(&header_bytes(
        LAYOUT_DENSE,
        matrix.rows as u64,
        matrix.cols as u64,
        &matrix.meta,
    ))?;
    write_payload(&mut writer, &matrix.entries)?;
    writer.flush()?;
    Ok(())
}

fn read_dense<T: Real>(path: &Path) -> Result<(usize, usize, Vec<T>, KernelMeta)> {
    let mut reader = BufReader::new(File::open(path)?);
    let header = read_header(&mut reader, path)?;
    if header.layout != LAYOUT_DENSE {
        return Err(Error::BadFileFormat {
            path: path.display().to_string(),
            what: "QKM1 kernel",
            msg: "file is an unfinished checkpoint, not a dense matrix".into(),
        });
    }
    let mut entries = Vec::with_capacity(header.rows * header.cols);
    let mut buf = [0u8; 8];
    for _ in 0..header.rows * header.cols {
        reader.read_exact(&mut buf).map_err(|_| Error::BadFileFormat {
            path: path.display().to_string(),
            what: "QKM1 kernel",
            msg: "truncated payload".into(),
        })?;
        entries.push(real(f64::from_le_bytes(buf)));
    }
    Ok((header.rows, header.cols, entries, header.meta))
}

pub fn read_kernel_matrix<T: Real>(path: &Path) -> Result<KernelMatrix<T>> {
    let (rows, cols, entries, meta) = read_dense(path)?;
    if rows != cols {
        return Err(Error::BadFileFormat {
            path: path.display().to_string(),
            what: "QKM1 kernel",
            msg: format!("expected a square matrix, got {rows}x{cols}"),
        });
    }
    KernelMatrix::from_entries(rows, entries, meta)
}

pub fn read_cross_matrix<T: Real>(path: &Path) -> Result<CrossMatrix<T>> {
    let (rows, cols, entries, meta) = read_dense(path)?;
    CrossMatrix::from_entries(rows, cols, entries, meta)
}

/// Optional CSV export of any kernel block.
pub fn write_matrix_csv<T: Real>(path: &Path, rows: usize, cols: usize, entries: &[T]) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    for row in 0..rows {
        let line: Vec<String> = (0..cols)
            .map(|col| format!("{}", entries[row * cols + col]))
            .collect();
        writeln!(writer, "{}", line.join(","))?;
    }
    writer.flush()?;
    Ok(())
}

/// Append-only upper-triangle checkpoint for long Gram runs.
struct CheckpointWriter {
    file: File,
}

impl CheckpointWriter {
    /// Open or create a checkpoint. Returns the writer and the rows already
    /// completed by a previous run (empty for a fresh file). A trailing
    /// partial row from an interrupted write is truncated away.
    fn open(path: &Path, n: usize, meta: &KernelMeta) -> Result<(Self, Vec<Vec<f64>>)> {
        if path.exists() {
            let mut reader = BufReader::new(File::open(path)?);
            let header = read_header(&mut reader, path)?;
            let mismatch = |msg: String| Error::CheckpointMismatch {
                path: path.display().to_string(),
                msg,
            };
            if header.layout != LAYOUT_TRIANGLE {
                return Err(mismatch("not a checkpoint file".into()));
            }
            if header.rows != n || header.cols != n {
                return Err(mismatch(format!("checkpoint is {}x{}, run needs {n}x{n}", header.rows, header.cols)));
            }
            if header.meta != *meta {
                return Err(mismatch(format!(
                    "checkpoint metadata {:?} != requested {:?}",
                    header.meta, meta
                )));
            }
            let mut payload = Vec::new();
            reader.read_to_end(&mut payload)?;
            let mut rows: Vec<Vec<f64>> = Vec::new();
            let mut offset = 0usize;
            for i in 0..n {
                let row_bytes = (n - i) * 8;
                if payload.len() - offset < row_bytes {
                    break;
                }
                let row: Vec<f64> = payload[offset..offset + row_bytes]
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                    .collect();
                rows.push(row);
                offset += row_bytes;
            }
            let keep = (header.byte_len + offset) as u64;
            let file = OpenOptions::new().read(true).write(true).open(path)?;
            file.set_len(keep)?;
            let mut file = file;
            file.seek(SeekFrom::End(0))?;
            Ok((CheckpointWriter { file }, rows))
        } else {
            let mut file = File::create(path)?;
            file.write_all(&header_bytes(LAYOUT_TRIANGLE, n as u64, n as u64, meta))?;
            file.flush()?;
            Ok((CheckpointWriter { file }, Vec::new()))
        }
    }

    fn append_row<T: Real>(&mut self, row: &[T]) -> Result<()> {
        let mut bytes = Vec::with_capacity(row.len() * 8);
        for value in row {
            bytes.extend_from_slice(&value.to_f64().unwrap_or(f64::NAN).to_le_bytes());
        }
        self.file.write_all(&bytes)?;
        self.file.flush()?;
        Ok(())
    }
}
