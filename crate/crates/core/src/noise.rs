//! Stochastic noise injection and measurement-error mitigation.
//!
//! Noise is unravelled per shot instead of evolving density matrices: after
//! each gate a uniformly random Pauli is applied to one involved qubit with
//! probability `p1` (one-qubit gates) or `p2` (CNOT), and the reported bits
//! are flipped per a per-qubit confusion matrix at measurement. Shots are
//! independent trajectories with generators derived from `(seed, shot)`, so
//! a model with all rates zero reproduces the ideal sampler's counts exactly.
//!
//! Mitigation follows the basis-state calibration scheme: prepare every basis
//! state (or, tensored, each qubit's two states), record how the readout
//! garbles them into a column-stochastic response matrix, then recover the
//! ideal distribution by a nonnegativity- and normalisation-constrained
//! least-squares solve. The raw unconstrained solution is kept for
//! diagnostics.

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::shot_rng;
use crate::scalar::{real, Real};
use crate::statevec::{cumulative_f64, draw_index, Circuit, Pauli, Statevector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Parameterised noise: depolarizing-style Pauli errors per gate plus
/// per-qubit readout confusion matrices (`readout[q][true_bit][reported_bit]`,
/// rows summing to one).
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel<T = f64> {
    pub p1: T,
    pub p2: T,
    pub readout: Vec<[[T; 2]; 2]>,
}

impl<T: Real> NoiseModel<T> {
    /// All rates zero: reproduces the ideal sampler.
    pub fn noiseless(n_qubits: usize) -> Self {
        Self::uniform(n_qubits, T::zero(), T::zero(), T::zero(), T::zero())
    }

    /// Same gate rates everywhere and the same (possibly asymmetric) readout
    /// flip probabilities on every qubit.
    pub fn uniform(n_qubits: usize, p1: T, p2: T, flip01: T, flip10: T) -> Self {
        let confusion = [
            [T::one() - flip01, flip01],
            [flip10, T::one() - flip10],
        ];
        NoiseModel {
            p1,
            p2,
            readout: vec![confusion; n_qubits],
        }
    }

    /// Readout-only noise with a symmetric flip probability.
    pub fn readout_only(n_qubits: usize, flip: T) -> Self {
        Self::uniform(n_qubits, T::zero(), T::zero(), flip, flip)
    }

    /// Representative magnitudes of a 27-qubit-era superconducting device:
    /// p1 = 0.001, p2 = 0.02, readout flip 0.02. Not calibrated device data.
    pub fn toronto_like(n_qubits: usize) -> Self {
        Self::uniform(n_qubits, real(0.001), real(0.02), real(0.02), real(0.02))
    }

    pub fn n_qubits(&self) -> usize {
        self.readout.len()
    }

    pub fn validate_for(&self, n_qubits: usize) -> Result<()> {
        let unit = |p: T| p >= T::zero() && p <= T::one();
        if !unit(self.p1) || !unit(self.p2) {
            return Err(Error::BadNoiseModel("gate error rates must lie in [0, 1]".into()));
        }
        if self.readout.len() < n_qubits {
            return Err(Error::BadNoiseModel(format!(
                "readout noise defined for {} qubits, circuit needs {}",
                self.readout.len(),
                n_qubits
            )));
        }
        for (q, confusion) in self.readout.iter().enumerate() {
            for row in confusion {
                if !unit(row[0]) || !unit(row[1]) {
                    return Err(Error::BadNoiseModel(format!("qubit {q} confusion entries outside [0, 1]")));
                }
                if ((row[0] + row[1]) - T::one()).abs() > real(1e-12) {
                    return Err(Error::BadNoiseModel(format!("qubit {q} confusion rows must sum to 1")));
                }
            }
        }
        Ok(())
    }

    fn is_noiseless_gates(&self) -> bool {
        self.p1 == T::zero() && self.p2 == T::zero()
    }
}

/// Full or per-qubit (tensored) calibration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalibrationMode {
    Full,
    Tensored,
}

impl CalibrationMode {
    /// Full calibration below five qubits, tensored above: 2^n preparation
    /// circuits are wasteful once n grows.
    pub fn default_for(n_qubits: usize) -> CalibrationMode {
        if n_qubits > 4 {
            CalibrationMode::Tensored
        } else {
            CalibrationMode::Full
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CalibrationMode::Full => "full",
            CalibrationMode::Tensored => "tensored",
        }
    }

    pub fn parse(s: &str) -> Result<CalibrationMode> {
        match s {
            "full" => Ok(CalibrationMode::Full),
            "tensored" => Ok(CalibrationMode::Tensored),
            other => Err(Error::BadConfig(format!("unknown calibration mode `{other}`"))),
        }
    }
}

/// Measured response of the readout to prepared basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationMatrix<T = f64> {
    n_qubits: usize,
    shots: u64,
    data: CalData<T>,
}

#[derive(Debug, Clone, PartialEq)]
enum CalData<T> {
    /// Column-stochastic 2^n x 2^n response, row-major:
    /// `matrix[measured * dim + prepared]`.
    Full(Vec<T>),
    /// One 2x2 response per qubit, `m[measured][prepared]`.
    Tensored(Vec<[[T; 2]; 2]>),
}

impl<T: Real> CalibrationMatrix<T> {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn mode(&self) -> CalibrationMode {
        match self.data {
            CalData::Full(_) => CalibrationMode::Full,
            CalData::Tensored(_) => CalibrationMode::Tensored,
        }
    }

    /// The dense response matrix (tensored calibrations are expanded).
    pub fn dense(&self) -> Vec<T> {
        match &self.data {
            CalData::Full(m) => m.clone(),
            CalData::Tensored(per_qubit) => {
                let dim = self.dim();
                let mut out = vec![T::zero(); dim * dim];
                for measured in 0..dim {
                    for prepared in 0..dim {
                        let mut product = T::one();
                        for (q, m) in per_qubit.iter().enumerate() {
                            product = product * m[(measured >> q) & 1][(prepared >> q) & 1];
                        }
                        out[measured * dim + prepared] = product;
                    }
                }
                out
            }
        }
    }

    /// Apply the response (or its per-qubit inverse pieces) to a vector.
    fn apply(&self, v: &[T]) -> Vec<T> {
        match &self.data {
            CalData::Full(m) => linalg::matvec(m, self.dim(), self.dim(), v),
            CalData::Tensored(per_qubit) => {
                let mut out = v.to_vec();
                for (q, m) in per_qubit.iter().enumerate() {
                    apply_2x2_on_axis(&mut out, q, m);
                }
                out
            }
        }
    }

    fn apply_transpose(&self, v: &[T]) -> Vec<T> {
        match &self.data {
            CalData::Full(m) => {
                let dim = self.dim();
                (0..dim)
                    .map(|col| (0..dim).map(|row| m[row * dim + col] * v[row]).sum())
                    .collect()
            }
            CalData::Tensored(per_qubit) => {
                let mut out = v.to_vec();
                for (q, m) in per_qubit.iter().enumerate() {
                    let transposed = [[m[0][0], m[1][0]], [m[0][1], m[1][1]]];
                    apply_2x2_on_axis(&mut out, q, &transposed);
                }
                out
            }
        }
    }
}

fn apply_2x2_on_axis<T: Real>(v: &mut [T], qubit: usize, m: &[[T; 2]; 2]) {
    let step = 1usize << qubit;
    for base in (0..v.len()).step_by(2 * step) {
        for offset in 0..step {
            let i0 = base + offset;
            let i1 = i0 + step;
            let a = v[i0];
            let b = v[i1];
            v[i0] = m[0][0] * a + m[0][1] * b;
            v[i1] = m[1][0] * a + m[1][1] * b;
        }
    }
}

/// Result of mitigating one measured distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Mitigated<T = f64> {
    /// Unconstrained linear-inversion solution; may be negative.
    pub quasi: Vec<T>,
    /// Constrained solution: nonnegative, sums to one.
    pub probabilities: Vec<T>,
}

/// Sample a circuit under the noise model.
///
/// Per shot: evolve the circuit, inserting a random Pauli on one involved
/// qubit after any gate that fires an error; draw one measurement outcome;
/// flip each reported bit per the confusion matrix. Deterministic under
/// `seed` and independent of evaluation order across shots.
pub fn noisy_sample<T: Real>(
    circuit: &Circuit<T>,
    shots: u64,
    seed: u64,
    model: &NoiseModel<T>,
) -> Result<BTreeMap<usize, u64>> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let n = circuit.n_qubits();
    model.validate_for(n)?;

    // Clean prefix states let error-free prefixes (and whole error-free
    // shots) skip re-simulation. Capped so wide registers with long circuits
    // fall back to plain per-shot evolution.
    let dim = 1usize << n;
    let cache_entries = (circuit.gate_count() + 1) * dim;
    let prefix: Option<Vec<Statevector<T>>> = if cache_entries <= (1 << 22) {
        let mut states = Vec::with_capacity(circuit.gate_count() + 1);
        let mut state = Statevector::zero(n)?;
        states.push(state.clone());
        for gate in circuit.gates() {
            state.apply_gate_in_place(gate);
            states.push(state.clone());
        }
        Some(states)
    } else {
        None
    };
    let clean_final: Statevector<T> = match &prefix {
        Some(states) => states[states.len() - 1].clone(),
        None => Statevector::zero(n)?.apply_circuit(circuit)?,
    };
    let clean_cumulative = cumulative_f64(&clean_final.probabilities());

    let p1 = model.p1.to_f64().unwrap_or(0.0);
    let p2 = model.p2.to_f64().unwrap_or(0.0);
    let flip_probs: Vec<[f64; 2]> = (0..n)
        .map(|q| {
            [
                model.readout[q][0][1].to_f64().unwrap_or(0.0),
                model.readout[q][1][0].to_f64().unwrap_or(0.0),
            ]
        })
        .collect();
    let gates_noiseless = model.is_noiseless_gates();

    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    for shot in 0..shots {
        let mut rng = shot_rng(seed, shot);
        let index = if gates_noiseless {
            draw_index(&clean_cumulative, rng.random::<f64>())
        } else {
            sample_trajectory(circuit, prefix.as_deref(), &clean_cumulative, p1, p2, &mut rng)?
        };
        let mut reported = index;
        for (q, flips) in flip_probs.iter().enumerate() {
            let bit = (reported >> q) & 1;
            let p_flip = flips[bit];
            if p_flip > 0.0 && rng.random::<f64>() < p_flip {
                reported ^= 1 << q;
            }
        }
        *counts.entry(reported).or_insert(0) += 1;
    }
    Ok(counts)
}

/// One Monte Carlo trajectory: returns the pre-readout measurement outcome.
fn sample_trajectory<T: Real>(
    circuit: &Circuit<T>,
    prefix: Option<&[Statevector<T>]>,
    clean_cumulative: &[f64],
    p1: f64,
    p2: f64,
    rng: &mut ChaCha8Rng,
) -> Result<usize> {
    let mut state: Option<Statevector<T>> = if prefix.is_none() {
        Some(Statevector::zero(circuit.n_qubits())?)
    } else {
        None
    };
    for (g, gate) in circuit.gates().iter().enumerate() {
        if let Some(s) = state.as_mut() {
            s.apply_gate_in_place(gate);
        }
        let p_err = if gate.is_two_qubit() { p2 } else { p1 };
        if p_err > 0.0 && rng.random::<f64>() < p_err {
            if state.is_none() {
                // First error: branch off the cached clean prefix.
                state = Some(prefix.expect("prefix cache")[g + 1].clone());
            }
            let (first, second) = gate.qubits();
            let qubit = match second {
                Some(second) => {
                    if rng.random::<f64>() < 0.5 {
                        first
                    } else {
                        second
                    }
                }
                None => first,
            };
            let pauli = Pauli::from_index((rng.random::<f64>() * 3.0) as usize);
            state
                .as_mut()
                .expect("state materialised on first error")
                .apply_pauli_in_place(pauli, qubit);
        }
    }
    Ok(match state {
        Some(s) => draw_index(&cumulative_f64(&s.probabilities()), rng.random::<f64>()),
        None => draw_index(clean_cumulative, rng.random::<f64>()),
    })
}

/// Calibrate the readout by preparing basis states and measuring them under
/// the model's readout noise only.
///
/// Full mode prepares all 2^n basis states; tensored mode prepares two states
/// per qubit and records per-qubit 2x2 responses. Basis-state preparation and
/// measurement are classical here (X gates commute with the readout channel),
/// so only the confusion matrices enter.
pub fn calibrate<T: Real>(
    n_qubits: usize,
    shots: u64,
    seed: u64,
    model: &NoiseModel<T>,
    mode: CalibrationMode,
) -> Result<CalibrationMatrix<T>> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    model.validate_for(n_qubits)?;
    let flip = |rng: &mut ChaCha8Rng, q: usize, bit: usize| -> usize {
        let p_flip = model.readout[q][bit][1 - bit].to_f64().unwrap_or(0.0);
        if p_flip > 0.0 && rng.random::<f64>() < p_flip {
            1 - bit
        } else {
            bit
        }
    };
    let inv_shots = T::one() / T::from_u64(shots).unwrap();

    match mode {
        CalibrationMode::Full => {
            let dim = 1usize << n_qubits;
            let mut matrix = vec![T::zero(); dim * dim];
            for prepared in 0..dim {
                let mut rng = shot_rng(seed, prepared as u64);
                for _ in 0..shots {
                    let mut measured = 0usize;
                    for q in 0..n_qubits {
                        measured |= flip(&mut rng, q, (prepared >> q) & 1) << q;
                    }
                    matrix[measured * dim + prepared] += inv_shots;
                }
            }
            Ok(CalibrationMatrix {
                n_qubits,
                shots,
                data: CalData::Full(matrix),
            })
        }
        CalibrationMode::Tensored => {
            let mut per_qubit = Vec::with_capacity(n_qubits);
            for q in 0..n_qubits {
                let mut m = [[T::zero(); 2]; 2];
                for prepared in 0..2usize {
                    let mut rng = shot_rng(seed, (2 * q + prepared) as u64);
                    for _ in 0..shots {
                        let measured = flip(&mut rng, q, prepared);
                        m[measured][prepared] += inv_shots;
                    }
                }
                per_qubit.push(m);
            }
            Ok(CalibrationMatrix {
                n_qubits,
                shots,
                data: CalData::Tensored(per_qubit),
            })
        }
    }
}

const MAX_CONDITION: f64 = 1e6;

/// Undo readout noise on a measured distribution.
///
/// Solves `A p = p_raw` by unconstrained linear inversion (reported as
/// `quasi`), then returns the least-squares solution constrained to the
/// probability simplex.
pub fn mitigate<T: Real>(
    raw_counts: &BTreeMap<usize, u64>,
    cal: &CalibrationMatrix<T>,
) -> Result<Mitigated<T>> {
    let dim = cal.dim();
    let total: u64 = raw_counts.values().sum();
    if total == 0 {
        return Err(Error::ZeroShots);
    }
    let mut p_raw = vec![T::zero(); dim];
    for (&index, &count) in raw_counts {
        if index >= dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: index + 1 });
        }
        p_raw[index] = T::from_u64(count).unwrap() / T::from_u64(total).unwrap();
    }

    let quasi = match &cal.data {
        CalData::Full(matrix) => {
            let inverse = linalg::invert(matrix, dim)
                .ok_or(Error::MitigationUnreliable(f64::INFINITY))?;
            let condition = (linalg::norm_1(matrix, dim) * linalg::norm_1(&inverse, dim))
                .to_f64()
                .unwrap_or(f64::INFINITY);
            if condition > MAX_CONDITION {
                return Err(Error::MitigationUnreliable(condition));
            }
            linalg::matvec(&inverse, dim, dim, &p_raw)
        }
        CalData::Tensored(per_qubit) => {
            let mut condition = 1.0f64;
            let mut inverses = Vec::with_capacity(per_qubit.len());
            for m in per_qubit {
                let flat = [m[0][0], m[0][1], m[1][0], m[1][1]];
                let inv = linalg::invert(&flat, 2).ok_or(Error::MitigationUnreliable(f64::INFINITY))?;
                condition *= (linalg::norm_1(&flat, 2) * linalg::norm_1(&inv, 2))
                    .to_f64()
                    .unwrap_or(f64::INFINITY);
                inverses.push([[inv[0], inv[1]], [inv[2], inv[3]]]);
            }
            if condition > MAX_CONDITION {
                return Err(Error::MitigationUnreliable(condition));
            }
            let mut out = p_raw.clone();
            for (q, inv) in inverses.iter().enumerate() {
                apply_2x2_on_axis(&mut out, q, inv);
            }
            out
        }
    };

    let probabilities = constrained_solution(cal, &quasi, &p_raw);
    Ok(Mitigated { quasi, probabilities })
}

/// Least squares over the probability simplex. When the unconstrained
/// solution is already (numerically) feasible it is the optimum; otherwise
/// run projected gradient descent on `||A p - q||^2`.
fn constrained_solution<T: Real>(cal: &CalibrationMatrix<T>, quasi: &[T], p_raw: &[T]) -> Vec<T> {
    let feasible_tol: T = real(1e-12);
    let min = quasi.iter().cloned().fold(T::infinity(), T::min);
    let sum: T = quasi.iter().cloned().sum();
    if min >= -feasible_tol && (sum - T::one()).abs() <= real(1e-9) {
        let clamped: Vec<T> = quasi.iter().map(|&x| x.max(T::zero())).collect();
        let renorm: T = clamped.iter().cloned().sum();
        return clamped.into_iter().map(|x| x / renorm).collect();
    }

    // Lipschitz bound for the gradient of ||A p - q||^2: 2 * ||A||_1 ||A||_inf.
    let lipschitz = match &cal.data {
        CalData::Full(matrix) => {
            let dim = cal.dim();
            real::<T>(2.0) * linalg::norm_1(matrix, dim) * linalg::norm_inf(matrix, dim)
        }
        CalData::Tensored(per_qubit) => {
            let mut bound = T::one();
            for m in per_qubit {
                let flat = [m[0][0], m[0][1], m[1][0], m[1][1]];
                bound = bound * linalg::norm_1(&flat, 2) * linalg::norm_inf(&flat, 2);
            }
            real::<T>(2.0) * bound
        }
    };
    let step = T::one() / lipschitz;

    let mut p = linalg::project_to_simplex(quasi);
    for _ in 0..20_000 {
        let residual: Vec<T> = cal
            .apply(&p)
            .iter()
            .zip(p_raw.iter())
            .map(|(&a, &b)| a - b)
            .collect();
        let gradient = cal.apply_transpose(&residual);
        let candidate: Vec<T> = p
            .iter()
            .zip(gradient.iter())
            .map(|(&x, &g)| x - real::<T>(2.0) * step * g)
            .collect();
        let next = linalg::project_to_simplex(&candidate);
        let moved: T = next
            .iter()
            .zip(p.iter())
            .map(|(&a, &b)| (a - b).abs())
            .sum();
        p = next;
        if moved < real(1e-13) {
            break;
        }
    }
    p
}
