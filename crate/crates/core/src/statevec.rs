//! Dense statevector simulation of the small gate set used by the encoding
//! and kernel-estimation circuits: `H`, `RX(θ)`, `RZ(θ)` and `CNOT`.
//!
//! Conventions, fixed so that sampled counts are interpretable:
//!
//! * Qubit 0 is the least-significant bit of a basis index, so basis state
//!   `|b_{n-1} … b_1 b_0⟩` lives at index `Σ b_q · 2^q`.
//! * `RZ(θ) = diag(e^{-iθ/2}, e^{+iθ/2})` and
//!   `RX(θ) = [[cos θ/2, -i sin θ/2], [-i sin θ/2, cos θ/2]]`.
//! * Global phase is not normalised away; observable quantities
//!   (probabilities, |⟨a|b⟩|²) are phase-invariant and are what tests compare.
//!
//! Statevectors and circuits are immutable values; all public operations are
//! pure functions, so independent (state, circuit) pairs can be evaluated
//! concurrently without shared mutable state.

use crate::error::{Error, Result};
use crate::rng::shot_rng;
use crate::scalar::{real, Real};
use num_complex::Complex;
use rand::Rng;
use std::collections::BTreeMap;

/// Dense statevectors refuse more qubits than this; the experiments here
/// need at most 12.
pub const MAX_QUBITS: usize = 20;

/// One gate of the fixed set. Angles are in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate<T = f64> {
    H { target: usize },
    Rx { target: usize, angle: T },
    Rz { target: usize, angle: T },
    Cnot { control: usize, target: usize },
}

impl<T: Real> Gate<T> {
    /// Check the gate's qubit indices against a register size.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let check = |index: usize| {
            if index < n_qubits {
                Ok(())
            } else {
                Err(Error::QubitOutOfRange { index, n_qubits })
            }
        };
        match *self {
            Gate::H { target } | Gate::Rx { target, .. } | Gate::Rz { target, .. } => check(target),
            Gate::Cnot { control, target } => {
                check(control)?;
                check(target)?;
                if control == target {
                    return Err(Error::CnotSameQubit(control));
                }
                Ok(())
            }
        }
    }

    /// The inverse gate: H and CNOT are self-inverse, rotations negate.
    pub fn inverse(&self) -> Gate<T> {
        match *self {
            Gate::H { target } => Gate::H { target },
            Gate::Rx { target, angle } => Gate::Rx {
                target,
                angle: -angle,
            },
            Gate::Rz { target, angle } => Gate::Rz {
                target,
                angle: -angle,
            },
            Gate::Cnot { control, target } => Gate::Cnot { control, target },
        }
    }

    /// True for the two-qubit gate of the set.
    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cnot { .. })
    }

    /// Qubits the gate acts on.
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::H { target } | Gate::Rx { target, .. } | Gate::Rz { target, .. } => (target, None),
            Gate::Cnot { control, target } => (control, Some(target)),
        }
    }
}

/// An ordered gate program on a fixed register.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit<T = f64> {
    n_qubits: usize,
    gates: Vec<Gate<T>>,
}

impl<T: Real> Circuit<T> {
    /// Build a circuit, validating every gate against the register size.
    pub fn new(n_qubits: usize, gates: Vec<Gate<T>>) -> Result<Self> {
        for gate in &gates {
            gate.validate(n_qubits)?;
        }
        Ok(Circuit { n_qubits, gates })
    }

    /// An empty circuit on `n_qubits`.
    pub fn empty(n_qubits: usize) -> Self {
        Circuit {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate<T>] {
        &self.gates
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    /// Number of CNOTs, the quantity compared across encoding strategies.
    pub fn cnot_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    /// Append one validated gate.
    pub fn push(&mut self, gate: Gate<T>) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Append all gates of `other` (register sizes must agree).
    pub fn extend(&mut self, other: &Circuit<T>) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                actual: other.n_qubits,
            });
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }

    /// The adjoint circuit: gates reversed, each inverted.
    pub fn adjoint(&self) -> Circuit<T> {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }
}

/// A normalised pure state of `n_qubits` qubits: 2^n complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector<T = f64> {
    n_qubits: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Real> Statevector<T> {
    /// The all-zeros state |0…0⟩.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits(n_qubits));
        }
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1usize << n_qubits];
        amps[0] = Complex::new(T::one(), T::zero());
        Ok(Statevector { n_qubits, amps })
    }

    /// The computational basis state with the given index.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let mut state = Self::zero(n_qubits)?;
        if index >= state.amps.len() {
            return Err(Error::DimensionMismatch {
                expected: state.amps.len(),
                actual: index,
            });
        }
        state.amps[0] = Complex::new(T::zero(), T::zero());
        state.amps[index] = Complex::new(T::one(), T::zero());
        Ok(state)
    }

    /// Wrap raw amplitudes; the vector must have length 2^n for some n ≥ 1
    /// and be normalised to within 1e-6.
    pub fn from_amplitudes(amps: Vec<Complex<T>>) -> Result<Self> {
        let n_qubits = amps.len().trailing_zeros() as usize;
        if amps.len() < 2 || amps.len() != 1usize << n_qubits {
            return Err(Error::DimensionMismatch {
                expected: amps.len().next_power_of_two(),
                actual: amps.len(),
            });
        }
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits(n_qubits));
        }
        let norm_sqr: T = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - T::one()).abs() > real(1e-6) {
            return Err(Error::NotNormalized {
                norm_sqr: norm_sqr.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Statevector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    /// Σ|amplitude|².
    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Apply a single gate, returning the new state.
    pub fn apply_gate(&self, gate: &Gate<T>) -> Result<Statevector<T>> {
        gate.validate(self.n_qubits)?;
        let mut out = self.clone();
        out.apply_gate_in_place(gate);
        Ok(out)
    }

    /// Apply a whole circuit in list order.
    pub fn apply_circuit(&self, circuit: &Circuit<T>) -> Result<Statevector<T>> {
        if circuit.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                actual: circuit.n_qubits(),
            });
        }
        let mut out = self.clone();
        for gate in circuit.gates() {
            out.apply_gate_in_place(gate);
        }
        Ok(out)
    }

    /// ⟨self|other⟩, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &Statevector<T>) -> Result<Complex<T>> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                actual: other.n_qubits,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * *b)
            .sum())
    }

    /// Measurement probabilities: element k is |amplitude_k|².
    pub fn probabilities(&self) -> Vec<T> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Draw `shots` outcomes from the measurement distribution.
    ///
    /// Each shot uses its own generator derived from `(seed, shot)`, the same
    /// derivation the noisy sampler uses, so a zero-noise model reproduces
    /// these counts exactly. Counts sum to `shots`; absent keys mean zero.
    pub fn sample_counts(&self, shots: u64, seed: u64) -> Result<BTreeMap<usize, u64>> {
        if shots == 0 {
            return Err(Error::ZeroShots);
        }
        let cumulative = cumulative_f64(&self.probabilities());
        let mut counts = BTreeMap::new();
        for shot in 0..shots {
            let mut rng = shot_rng(seed, shot);
            let index = draw_index(&cumulative, rng.random::<f64>());
            *counts.entry(index).or_insert(0) += 1;
        }
        Ok(counts)
    }

    pub(crate) fn apply_gate_in_place(&mut self, gate: &Gate<T>) {
        match *gate {
            Gate::H { target } => self.h(target),
            Gate::Rx { target, angle } => self.rx(target, angle),
            Gate::Rz { target, angle } => self.rz(target, angle),
            Gate::Cnot { control, target } => self.cnot(control, target),
        }
    }

    fn h(&mut self, q: usize) {
        let inv_sqrt2: T = real(std::f64::consts::FRAC_1_SQRT_2);
        let step = 1usize << q;
        for base in (0..self.amps.len()).step_by(2 * step) {
            for offset in 0..step {
                let i = base + offset;
                let j = i + step;
                let a = self.amps[i];
                let b = self.amps[j];
                self.amps[i] = (a + b) * inv_sqrt2;
                self.amps[j] = (a - b) * inv_sqrt2;
            }
        }
    }

    fn rx(&mut self, q: usize, angle: T) {
        let half = angle * real(0.5);
        let cos = half.cos();
        let neg_i_sin = Complex::new(T::zero(), -half.sin());
        let step = 1usize << q;
        for base in (0..self.amps.len()).step_by(2 * step) {
            for offset in 0..step {
                let i = base + offset;
                let j = i + step;
                let a = self.amps[i];
                let b = self.amps[j];
                self.amps[i] = a * cos + b * neg_i_sin;
                self.amps[j] = a * neg_i_sin + b * cos;
            }
        }
    }

    fn rz(&mut self, q: usize, angle: T) {
        let half = angle * real(0.5);
        let phase0 = Complex::from_polar(T::one(), -half);
        let phase1 = Complex::from_polar(T::one(), half);
        for (index, amp) in self.amps.iter_mut().enumerate() {
            *amp = *amp * if (index >> q) & 1 == 0 { phase0 } else { phase1 };
        }
    }

    fn cnot(&mut self, control: usize, target: usize) {
        let cmask = 1usize << control;
        let tmask = 1usize << target;
        for index in 0..self.amps.len() {
            if index & cmask != 0 && index & tmask == 0 {
                self.amps.swap(index, index | tmask);
            }
        }
    }

    /// Pauli applications used by the stochastic noise model.
    pub(crate) fn apply_pauli_in_place(&mut self, pauli: Pauli, q: usize) {
        let mask = 1usize << q;
        match pauli {
            Pauli::X => {
                for index in 0..self.amps.len() {
                    if index & mask == 0 {
                        self.amps.swap(index, index | mask);
                    }
                }
            }
            Pauli::Y => {
                let i = Complex::new(T::zero(), T::one());
                for index in 0..self.amps.len() {
                    if index & mask == 0 {
                        let flipped = index | mask;
                        let a = self.amps[index];
                        self.amps[index] = -i * self.amps[flipped];
                        self.amps[flipped] = i * a;
                    }
                }
            }
            Pauli::Z => {
                for (index, amp) in self.amps.iter_mut().enumerate() {
                    if index & mask != 0 {
                        *amp = -*amp;
                    }
                }
            }
        }
    }
}

/// The three non-identity Paulis, for stochastic error injection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub(crate) fn from_index(k: usize) -> Pauli {
        match k % 3 {
            0 => Pauli::X,
            1 => Pauli::Y,
            _ => Pauli::Z,
        }
    }
}

/// Cumulative distribution in f64, for shot sampling.
pub(crate) fn cumulative_f64<T: Real>(probabilities: &[T]) -> Vec<f64> {
    let mut acc = 0.0;
    probabilities
        .iter()
        .map(|p| {
            acc += p.to_f64().unwrap_or(0.0);
            acc
        })
        .collect()
}

/// Invert the cumulative distribution at `u ∈ [0, 1)`.
pub(crate) fn draw_index(cumulative: &[f64], u: f64) -> usize {
    let index = cumulative.partition_point(|&c| c <= u);
    index.min(cumulative.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Independent dense oracle: the gate lifted to a full 2^n x 2^n matrix
    /// via Kronecker products, applied by plain matrix-vector multiplication.
    mod dense {
        use num_complex::Complex64;

        pub fn kron(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
            let (ra, ca) = (a.len(), a[0].len());
            let (rb, cb) = (b.len(), b[0].len());
            let mut out = vec![vec![Complex64::new(0.0, 0.0); ca * cb]; ra * rb];
            for i in 0..ra {
                for j in 0..ca {
                    for k in 0..rb {
                        for l in 0..cb {
                            out[i * rb + k][j * cb + l] = a[i][j] * b[k][l];
                        }
                    }
                }
            }
            out
        }

        pub fn eye(dim: usize) -> Vec<Vec<Complex64>> {
            let mut out = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
            for (i, row) in out.iter_mut().enumerate() {
                row[i] = Complex64::new(1.0, 0.0);
            }
            out
        }

        /// Lift a single-qubit matrix to qubit `q` of an `n`-qubit register,
        /// with qubit 0 as the least-significant bit of the index.
        pub fn lift1(u: &[[Complex64; 2]; 2], q: usize, n: usize) -> Vec<Vec<Complex64>> {
            let u_mat = vec![vec![u[0][0], u[0][1]], vec![u[1][0], u[1][1]]];
            let high = eye(1 << (n - 1 - q));
            let low = eye(1 << q);
            kron(&kron(&high, &u_mat), &low)
        }

        pub fn matvec(m: &[Vec<Complex64>], v: &[Complex64]) -> Vec<Complex64> {
            m.iter()
                .map(|row| row.iter().zip(v.iter()).map(|(a, b)| a * b).sum())
                .collect()
        }

        pub fn matmul(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
            let n = a.len();
            let mut out = vec![vec![Complex64::new(0.0, 0.0); n]; n];
            for i in 0..n {
                for j in 0..n {
                    out[i][j] = (0..n).map(|k| a[i][k] * b[k][j]).sum();
                }
            }
            out
        }

        pub fn madd(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
            a.iter()
                .zip(b.iter())
                .map(|(ra, rb)| ra.iter().zip(rb.iter()).map(|(x, y)| x + y).collect())
                .collect()
        }

        /// CNOT as P0 ⊗ I + P1 ⊗ X, built from Kronecker algebra.
        pub fn cnot(control: usize, target: usize, n: usize) -> Vec<Vec<Complex64>> {
            let zero = Complex64::new(0.0, 0.0);
            let one = Complex64::new(1.0, 0.0);
            let p0 = [[one, zero], [zero, zero]];
            let p1 = [[zero, zero], [zero, one]];
            let x = [[zero, one], [one, zero]];
            let lhs = lift1(&p0, control, n);
            let rhs = matmul(&lift1(&p1, control, n), &lift1(&x, target, n));
            madd(&lhs, &rhs)
        }

        pub fn gate_matrix(gate: &crate::statevec::Gate<f64>, n: usize) -> Vec<Vec<Complex64>> {
            use crate::statevec::Gate;
            let zero = Complex64::new(0.0, 0.0);
            match *gate {
                Gate::H { target } => {
                    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                    lift1(&[[s, s], [s, -s]], target, n)
                }
                Gate::Rx { target, angle } => {
                    let cos = Complex64::new((angle / 2.0).cos(), 0.0);
                    let msin = Complex64::new(0.0, -(angle / 2.0).sin());
                    lift1(&[[cos, msin], [msin, cos]], target, n)
                }
                Gate::Rz { target, angle } => {
                    let e0 = Complex64::from_polar(1.0, -angle / 2.0);
                    let e1 = Complex64::from_polar(1.0, angle / 2.0);
                    lift1(&[[e0, zero], [zero, e1]], target, n)
                }
                Gate::Cnot { control, target } => cnot(control, target, n),
            }
        }
    }

    fn random_state(n: usize, seed: u64) -> Statevector<f64> {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut amps: Vec<Complex64> = (0..1usize << n)
            .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        Statevector::from_amplitudes(amps).unwrap()
    }

    fn all_gates(n: usize) -> Vec<Gate<f64>> {
        let mut gates = Vec::new();
        for q in 0..n {
            gates.push(Gate::H { target: q });
            gates.push(Gate::Rx { target: q, angle: 0.7 + q as f64 });
            gates.push(Gate::Rz { target: q, angle: -1.3 + 0.4 * q as f64 });
        }
        for control in 0..n {
            for target in 0..n {
                if control != target {
                    gates.push(Gate::Cnot { control, target });
                }
            }
        }
        gates
    }

    #[test]
    fn hadamard_on_zero() {
        let state = Statevector::<f64>::zero(1).unwrap();
        let out = state.apply_gate(&Gate::H { target: 0 }).unwrap();
        assert!((out.amplitudes()[0] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);
        assert!((out.amplitudes()[1] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rz_on_zero_keeps_probabilities() {
        let state = Statevector::<f64>::zero(1).unwrap();
        let out = state
            .apply_gate(&Gate::Rz { target: 0, angle: 1.234 })
            .unwrap();
        let probs = out.probabilities();
        assert!((probs[0] - 1.0).abs() < 1e-12);
        assert!(probs[1].abs() < 1e-12);
    }

    #[test]
    fn cnot_builds_bell_state() {
        let state = Statevector::<f64>::zero(2).unwrap();
        let plus = state.apply_gate(&Gate::H { target: 0 }).unwrap();
        // (|00> + |10>)/sqrt(2) in our LSB-first indexing is amplitude at 0 and 1.
        let bell = plus
            .apply_gate(&Gate::Cnot { control: 0, target: 1 })
            .unwrap();
        assert!((bell.amplitudes()[0] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);
        assert!((bell.amplitudes()[3] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);
        assert!(bell.amplitudes()[1].norm() < 1e-12);
        assert!(bell.amplitudes()[2].norm() < 1e-12);
    }

    #[test]
    fn empty_circuit_is_identity() {
        let state = random_state(3, 11);
        let out = state.apply_circuit(&Circuit::empty(3)).unwrap();
        assert_eq!(state.amplitudes(), out.amplitudes());
    }

    #[test]
    fn double_hadamard_is_identity() {
        let state = Statevector::<f64>::zero(1).unwrap();
        let circuit = Circuit::new(
            1,
            vec![Gate::H { target: 0 }, Gate::H { target: 0 }],
        )
        .unwrap();
        let out = state.apply_circuit(&circuit).unwrap();
        assert!((out.amplitudes()[0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!(out.amplitudes()[1].norm() < 1e-12);
    }

    #[test]
    fn zz_phase_block_matches_matrix_exponential() {
        // CNOT(0->1), RZ(1, 2f), CNOT(0->1) must equal exp(-i f Z⊗Z), whose
        // diagonal is exp(-i f (-1)^{b0 xor b1}); the oracle exponentiates the
        // diagonal generator element-wise.
        let f = 0.7342;
        let plus_plus = Statevector::from_amplitudes(vec![c(0.5, 0.0); 4]).unwrap();
        let circuit = Circuit::new(
            2,
            vec![
                Gate::Cnot { control: 0, target: 1 },
                Gate::Rz { target: 1, angle: 2.0 * f },
                Gate::Cnot { control: 0, target: 1 },
            ],
        )
        .unwrap();
        let got = plus_plus.apply_circuit(&circuit).unwrap();

        // Z⊗Z diagonal over LSB-first indices 00,01,10,11.
        let zz = [1.0, -1.0, -1.0, 1.0];
        let expected: Vec<Complex64> = plus_plus
            .amplitudes()
            .iter()
            .zip(zz.iter())
            .map(|(a, z)| a * Complex64::from_polar(1.0, -f * z))
            .collect();
        for (g, e) in got.amplitudes().iter().zip(expected.iter()) {
            assert!((g - e).norm() < 1e-12, "got {g}, expected {e}");
        }
    }

    #[test]
    fn gates_match_dense_oracle_up_to_three_qubits() {
        for n in 1..=3 {
            for (k, gate) in all_gates(n).into_iter().enumerate() {
                let state = random_state(n, 100 + k as u64);
                let fast = state.apply_gate(&gate).unwrap();
                let slow = dense::matvec(&dense::gate_matrix(&gate, n), state.amplitudes());
                for (a, b) in fast.amplitudes().iter().zip(slow.iter()) {
                    assert!((a - b).norm() < 1e-12, "gate {gate:?} on {n} qubits");
                }
            }
        }
    }

    #[test]
    fn inner_product_is_conjugate_linear_and_normalised() {
        let a = random_state(3, 5);
        let b = random_state(3, 6);
        let self_product = a.inner_product(&a).unwrap();
        assert!((self_product - c(1.0, 0.0)).norm() < 1e-12);
        let ab = a.inner_product(&b).unwrap();
        let ba = b.inner_product(&a).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-12);
    }

    #[test]
    fn orthogonal_basis_states() {
        let zero = Statevector::<f64>::basis(1, 0).unwrap();
        let one = Statevector::<f64>::basis(1, 1).unwrap();
        assert_eq!(zero.inner_product(&one).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn probabilities_of_basis_and_plus() {
        let zero = Statevector::<f64>::zero(1).unwrap();
        assert_eq!(zero.probabilities(), vec![1.0, 0.0]);
        let plus = zero.apply_gate(&Gate::H { target: 0 }).unwrap();
        let probs = plus.probabilities();
        assert!((probs[0] - 0.5).abs() < 1e-12);
        assert!((probs[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn probabilities_match_amplitudes_after_circuit() {
        let circuit = Circuit::new(
            3,
            vec![
                Gate::H { target: 0 },
                Gate::Rx { target: 1, angle: 0.9 },
                Gate::Cnot { control: 0, target: 2 },
                Gate::Rz { target: 2, angle: 0.4 },
            ],
        )
        .unwrap();
        let out = Statevector::<f64>::zero(3).unwrap().apply_circuit(&circuit).unwrap();
        let probs = out.probabilities();
        for (p, a) in probs.iter().zip(out.amplitudes()) {
            assert!((p - a.norm_sqr()).abs() < 1e-15);
        }
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sampling_deterministic_state_lands_on_single_index() {
        let zero = Statevector::<f64>::zero(2).unwrap();
        let counts = zero.sample_counts(1000, 3).unwrap();
        assert_eq!(counts.len(), 1);
        assert_eq!(counts[&0], 1000);
    }

    #[test]
    fn sampling_plus_state_within_binomial_bound() {
        let plus = Statevector::<f64>::zero(1)
            .unwrap()
            .apply_gate(&Gate::H { target: 0 })
            .unwrap();
        let shots = 100_000u64;
        let counts = plus.sample_counts(shots, 12).unwrap();
        let frac = *counts.get(&0).unwrap_or(&0) as f64 / shots as f64;
        let sigma = (0.25 / shots as f64).sqrt();
        assert!((frac - 0.5).abs() < 5.0 * sigma, "frac {frac}");
    }

    #[test]
    fn sampling_is_reproducible() {
        let state = random_state(3, 77);
        let a = state.sample_counts(4096, 9).unwrap();
        let b = state.sample_counts(4096, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.values().sum::<u64>(), 4096);
    }

    #[test]
    fn zero_shots_reported() {
        let state = Statevector::<f64>::zero(1).unwrap();
        assert!(matches!(state.sample_counts(0, 1), Err(Error::ZeroShots)));
    }

    #[test]
    fn gate_validation_errors() {
        let state = Statevector::<f64>::zero(2).unwrap();
        assert!(matches!(
            state.apply_gate(&Gate::H { target: 2 }),
            Err(Error::QubitOutOfRange { .. })
        ));
        assert!(matches!(
            state.apply_gate(&Gate::Cnot { control: 1, target: 1 }),
            Err(Error::CnotSameQubit(1))
        ));
        assert!(Statevector::<f64>::zero(MAX_QUBITS + 1).is_err());
        let circuit = Circuit::new(3, vec![Gate::H { target: 0 }]).unwrap();
        assert!(matches!(
            state.apply_circuit(&circuit),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn works_with_f32_scalars() {
        let state: Statevector<f32> = Statevector::zero(2).unwrap();
        let circuit = Circuit::new(
            2,
            vec![
                Gate::H { target: 0 },
                Gate::Rx { target: 1, angle: 0.5f32 },
                Gate::Cnot { control: 0, target: 1 },
            ],
        )
        .unwrap();
        let out = state.apply_circuit(&circuit).unwrap();
        assert!((out.norm_sqr() - 1.0).abs() < 1e-5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn norm_preserved_by_random_gates(seed in 0u64..1_000, angle in -6.3f64..6.3, pick in 0usize..4, q in 0usize..3) {
            let n = 3;
            let state = random_state(n, seed);
            let gate = match pick {
                0 => Gate::H { target: q },
                1 => Gate::Rx { target: q, angle },
                2 => Gate::Rz { target: q, angle },
                _ => Gate::Cnot { control: q, target: (q + 1) % n },
            };
            let out = state.apply_gate(&gate).unwrap();
            prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn gate_then_inverse_restores_state(seed in 0u64..1_000, angle in -6.3f64..6.3, pick in 0usize..4, q in 0usize..3) {
            let n = 3;
            let state = random_state(n, seed);
            let gate = match pick {
                0 => Gate::H { target: q },
                1 => Gate::Rx { target: q, angle },
                2 => Gate::Rz { target: q, angle },
                _ => Gate::Cnot { control: q, target: (q + 1) % n },
            };
            let back = state
                .apply_gate(&gate)
                .unwrap()
                .apply_gate(&gate.inverse())
                .unwrap();
            for (a, b) in state.amplitudes().iter().zip(back.amplitudes()) {
                prop_assert!((a - b).norm() < 1e-12);
            }
        }

        #[test]
        fn inner_product_respects_cauchy_schwarz(sa in 0u64..500, sb in 500u64..1_000) {
            let a = random_state(3, sa);
            let b = random_state(3, sb);
            let ip = a.inner_product(&b).unwrap();
            prop_assert!(ip.norm() <= 1.0 + 1e-12);
        }
    }
}
