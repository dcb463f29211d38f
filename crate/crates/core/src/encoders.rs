//! Parameterised encoding circuits: the four strategies that map a feature
//! vector onto a quantum state.
//!
//! All phase-style rotations that realise the `exp(i x Z)` factors of the
//! layered encoding (every qubit of the combinatorial and separate-particle
//! circuits, and the momentum qubit of the Bloch variant) are emitted as
//! `RZ(2x)`, matching the `RZ(θ) = diag(e^{-iθ/2}, e^{+iθ/2})` convention of
//! the simulator. Bloch-sphere rotations (`RX` by theta, `RZ` by the second
//! variable) use their raw angles: they are rotations of the Bloch vector,
//! not phase factors.
//!
//! Qubit layout (qubit 0 is the least-significant bit):
//! * combinatorial: one qubit per feature, in feature order;
//! * bloch: one qubit per particle (phi is not encoded);
//! * separate-particle and separate-particle-bloch: two qubits per particle,
//!   `2i` the angle qubit and `2i + 1` the momentum qubit of particle `i`.

use crate::error::{Error, Result};
use crate::preprocess::FeatureVector;
use crate::scalar::{real, Real};
use crate::statevec::{Circuit, Gate, Statevector};

/// The four encoding strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Combinatorial,
    BlochSphere,
    SeparateParticle,
    SeparateParticleBloch,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Combinatorial,
        Strategy::BlochSphere,
        Strategy::SeparateParticle,
        Strategy::SeparateParticleBloch,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Combinatorial => "combinatorial",
            Strategy::BlochSphere => "bloch",
            Strategy::SeparateParticle => "separate-particle",
            Strategy::SeparateParticleBloch => "separate-particle-bloch",
        }
    }

    pub fn parse(name: &str) -> Result<Strategy> {
        match name {
            "combinatorial" => Ok(Strategy::Combinatorial),
            "bloch" => Ok(Strategy::BlochSphere),
            "separate-particle" => Ok(Strategy::SeparateParticle),
            "separate-particle-bloch" => Ok(Strategy::SeparateParticleBloch),
            other => Err(Error::BadConfig(format!("unknown encoder strategy `{other}`"))),
        }
    }
}

/// Which circuit to build and how many layers to stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncoderSpec {
    pub strategy: Strategy,
    /// Number of `[H layer + U(x)]` repetitions, L >= 1.
    pub layers: usize,
    /// Entangle the two qubits of each particle (separate-particle-bloch only).
    pub intra_particle_entangle: bool,
}

impl EncoderSpec {
    pub fn new(strategy: Strategy, layers: usize) -> Self {
        EncoderSpec {
            strategy,
            layers,
            intra_particle_entangle: false,
        }
    }

    pub fn with_intra(mut self, intra: bool) -> Self {
        self.intra_particle_entangle = intra;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 {
            return Err(Error::BadConfig("encoder layers must be >= 1".into()));
        }
        Ok(())
    }

    /// Compact identity string recorded in kernel-file metadata.
    pub fn tag(&self) -> String {
        if self.strategy == Strategy::SeparateParticleBloch {
            format!(
                "{}:L{}:intra={}",
                self.strategy.name(),
                self.layers,
                u8::from(self.intra_particle_entangle)
            )
        } else {
            format!("{}:L{}", self.strategy.name(), self.layers)
        }
    }

    pub fn parse_tag(tag: &str) -> Result<EncoderSpec> {
        let mut parts = tag.split(':');
        let name = parts.next().unwrap_or("");
        let strategy = Strategy::parse(name)?;
        let layers = parts
            .next()
            .and_then(|s| s.strip_prefix('L'))
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| Error::BadConfig(format!("bad encoder tag `{tag}`")))?;
        let intra = match parts.next() {
            None => false,
            Some("intra=0") => false,
            Some("intra=1") => true,
            Some(_) => return Err(Error::BadConfig(format!("bad encoder tag `{tag}`"))),
        };
        let spec = EncoderSpec::new(strategy, layers).with_intra(intra);
        spec.validate()?;
        Ok(spec)
    }

    /// Register size required for a feature vector of the given length.
    pub fn n_qubits_for(&self, feature_len: usize) -> Result<usize> {
        if feature_len == 0 {
            return Err(Error::EmptyInput("empty feature vector"));
        }
        match self.strategy {
            Strategy::Combinatorial => Ok(feature_len),
            _ => {
                if feature_len % 3 != 0 {
                    return Err(Error::BadFeatureLength(feature_len));
                }
                let particles = feature_len / 3;
                Ok(match self.strategy {
                    Strategy::BlochSphere => particles,
                    _ => 2 * particles,
                })
            }
        }
    }
}

/// The pairwise entangling phase of Eq-style circuits:
/// `f(x_l, x_m) = (1/pi)(x_l - pi)(x_m - pi)`.
pub fn entangler_f2<T: Real>(xl: T, xm: T) -> T {
    let pi = T::PI();
    (xl - pi) * (xm - pi) / pi
}

/// The three-variable intra-particle phase:
/// `f(p, theta, phi) = (1/pi^2)(pi - p)(pi - theta)(pi - phi)`.
pub fn entangler_f3<T: Real>(p: T, theta: T, phi: T) -> T {
    let pi = T::PI();
    (pi - p) * (pi - theta) * (pi - phi) / (pi * pi)
}

/// The ZZ phase block `exp(-i angle Z_l Z_m)` built from native gates:
/// `[CNOT(ql->qm), RZ(qm, 2*angle), CNOT(ql->qm)]`.
pub fn zz_block<T: Real>(ql: usize, qm: usize, angle: T) -> Result<[Gate<T>; 3]> {
    if ql == qm {
        return Err(Error::CnotSameQubit(ql));
    }
    Ok([
        Gate::Cnot { control: ql, target: qm },
        Gate::Rz { target: qm, angle: angle * real(2.0) },
        Gate::Cnot { control: ql, target: qm },
    ])
}

fn push_zz<T: Real>(circuit: &mut Circuit<T>, ql: usize, qm: usize, angle: T) -> Result<()> {
    for gate in zz_block(ql, qm, angle)? {
        circuit.push(gate)?;
    }
    Ok(())
}

/// Combinatorial encoding: one qubit per feature; every layer applies
/// Hadamards, per-qubit phases and a ZZ block for every qubit pair.
pub fn build_combinatorial<T: Real>(values: &[T], layers: usize) -> Result<Circuit<T>> {
    if values.is_empty() {
        return Err(Error::EmptyInput("empty feature vector"));
    }
    if layers == 0 {
        return Err(Error::BadConfig("encoder layers must be >= 1".into()));
    }
    let n = values.len();
    let mut circuit = Circuit::empty(n);
    for _ in 0..layers {
        for q in 0..n {
            circuit.push(Gate::H { target: q })?;
        }
        for (q, &x) in values.iter().enumerate() {
            circuit.push(Gate::Rz { target: q, angle: x * real(2.0) })?;
        }
        for l in 0..n {
            for m in (l + 1)..n {
                push_zz(&mut circuit, l, m, entangler_f2(values[l], values[m]))?;
            }
        }
    }
    Ok(circuit)
}

/// Bloch-sphere encoding: one qubit per particle carrying `(p~, theta)` as
/// successive `RX(theta)`, `RZ(p~)` rotations; phi is dropped and there is no
/// entanglement.
pub fn build_bloch<T: Real>(features: &FeatureVector<T>, layers: usize) -> Result<Circuit<T>> {
    let spec = EncoderSpec::new(Strategy::BlochSphere, layers);
    spec.validate()?;
    let n = spec.n_qubits_for(features.values.len())?;
    let mut circuit = Circuit::empty(n);
    for _ in 0..layers {
        for i in 0..n {
            let (p_scaled, theta, _phi) = features.particle(i);
            circuit.push(Gate::Rx { target: i, angle: theta })?;
            circuit.push(Gate::Rz { target: i, angle: p_scaled })?;
        }
    }
    Ok(circuit)
}

/// Separate-particle encoding: two qubits per particle, an intra-particle ZZ
/// block per particle, then inter-particle ZZ blocks between momentum qubits.
pub fn build_separate_particle<T: Real>(
    features: &FeatureVector<T>,
    layers: usize,
) -> Result<Circuit<T>> {
    let spec = EncoderSpec::new(Strategy::SeparateParticle, layers);
    spec.validate()?;
    let n = spec.n_qubits_for(features.values.len())?;
    let particles = n / 2;
    let mut circuit = Circuit::empty(n);
    let two = real::<T>(2.0);
    for _ in 0..layers {
        for q in 0..n {
            circuit.push(Gate::H { target: q })?;
        }
        for i in 0..particles {
            let (p_scaled, theta, phi) = features.particle(i);
            let angle_qubit = 2 * i;
            let momentum_qubit = 2 * i + 1;
            circuit.push(Gate::Rz { target: angle_qubit, angle: theta * two })?;
            circuit.push(Gate::Rz { target: angle_qubit, angle: phi * two })?;
            circuit.push(Gate::Rz { target: momentum_qubit, angle: p_scaled * two })?;
        }
        for i in 0..particles {
            let (p_scaled, theta, _phi) = features.particle(i);
            push_zz(&mut circuit, 2 * i, 2 * i + 1, entangler_f2(p_scaled, theta))?;
        }
        for i in 0..particles {
            for j in (i + 1)..particles {
                let pi_val = features.particle(i).0;
                let pj_val = features.particle(j).0;
                push_zz(&mut circuit, 2 * i + 1, 2 * j + 1, entangler_f2(pi_val, pj_val))?;
            }
        }
    }
    Ok(circuit)
}

/// Separate-particle encoding with the Bloch-sphere trick: `theta` and `phi`
/// packed into one qubit by raw rotations, the momentum on the other; an
/// optional intra-particle ZZ block uses the three-variable entangler.
pub fn build_separate_particle_bloch<T: Real>(
    features: &FeatureVector<T>,
    layers: usize,
    intra: bool,
) -> Result<Circuit<T>> {
    let spec = EncoderSpec::new(Strategy::SeparateParticleBloch, layers).with_intra(intra);
    spec.validate()?;
    let n = spec.n_qubits_for(features.values.len())?;
    let particles = n / 2;
    let mut circuit = Circuit::empty(n);
    let two = real::<T>(2.0);
    for _ in 0..layers {
        // Only momentum qubits follow the H-then-phase pattern; the angle
        // qubit is rotated straight from |0>.
        for i in 0..particles {
            circuit.push(Gate::H { target: 2 * i + 1 })?;
        }
        for i in 0..particles {
            let (p_scaled, theta, phi) = features.particle(i);
            let angle_qubit = 2 * i;
            let momentum_qubit = 2 * i + 1;
            circuit.push(Gate::Rx { target: angle_qubit, angle: theta })?;
            circuit.push(Gate::Rz { target: angle_qubit, angle: phi })?;
            circuit.push(Gate::Rz { target: momentum_qubit, angle: p_scaled * two })?;
        }
        if intra {
            for i in 0..particles {
                let (p_scaled, theta, phi) = features.particle(i);
                push_zz(&mut circuit, 2 * i, 2 * i + 1, entangler_f3(p_scaled, theta, phi))?;
            }
        }
        for i in 0..particles {
            for j in (i + 1)..particles {
                let pi_val = features.particle(i).0;
                let pj_val = features.particle(j).0;
                push_zz(&mut circuit, 2 * i + 1, 2 * j + 1, entangler_f2(pi_val, pj_val))?;
            }
        }
    }
    Ok(circuit)
}

/// Build the encoding circuit selected by `spec`.
pub fn build_circuit<T: Real>(features: &FeatureVector<T>, spec: &EncoderSpec) -> Result<Circuit<T>> {
    spec.validate()?;
    match spec.strategy {
        Strategy::Combinatorial => build_combinatorial(&features.values, spec.layers),
        Strategy::BlochSphere => build_bloch(features, spec.layers),
        Strategy::SeparateParticle => build_separate_particle(features, spec.layers),
        Strategy::SeparateParticleBloch => {
            build_separate_particle_bloch(features, spec.layers, spec.intra_particle_entangle)
        }
    }
}

/// Encode a feature vector into a statevector: `U(x)|0…0>`.
pub fn encode_state<T: Real>(features: &FeatureVector<T>, spec: &EncoderSpec) -> Result<Statevector<T>> {
    let circuit = build_circuit(features, spec)?;
    Statevector::zero(circuit.n_qubits())?.apply_circuit(&circuit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn fv(values: Vec<f64>) -> FeatureVector<f64> {
        FeatureVector { values, clamped: 0 }
    }

    fn fidelity(a: &Statevector<f64>, b: &Statevector<f64>) -> f64 {
        a.inner_product(b).unwrap().norm_sqr()
    }

    #[test]
    fn entangler_f2_values() {
        assert!(entangler_f2(PI, PI).abs() < 1e-15);
        assert!((entangler_f2(0.0, 0.0) - PI).abs() < 1e-12);
        assert!((entangler_f2(PI / 2.0, 0.0) - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn entangler_f3_values() {
        assert!(entangler_f3(PI, 0.3, 2.0).abs() < 1e-15);
        assert!((entangler_f3(0.0, 0.0, 0.0) - PI).abs() < 1e-12);
        assert!((entangler_f3(0.0, PI / 2.0, PI / 2.0) - PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn zz_block_zero_angle_is_identity() {
        let state = Statevector::zero(2)
            .unwrap()
            .apply_gate(&Gate::Rx { target: 0, angle: 0.8 })
            .unwrap()
            .apply_gate(&Gate::Rx { target: 1, angle: 1.9 })
            .unwrap();
        let circuit = Circuit::new(2, zz_block(0, 1, 0.0).unwrap().to_vec()).unwrap();
        let out = state.apply_circuit(&circuit).unwrap();
        for (a, b) in state.amplitudes().iter().zip(out.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn zz_block_is_diagonal() {
        let zero = Statevector::<f64>::zero(2).unwrap();
        let circuit = Circuit::new(2, zz_block(0, 1, 1.234).unwrap().to_vec()).unwrap();
        let out = zero.apply_circuit(&circuit).unwrap();
        let probs = out.probabilities();
        assert!((probs[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zz_block_matches_diagonal_exponential() {
        let angle = PI / 4.0;
        let plus_plus = Statevector::from_amplitudes(vec![Complex64::new(0.5, 0.0); 4]).unwrap();
        let circuit = Circuit::new(2, zz_block(0, 1, angle).unwrap().to_vec()).unwrap();
        let got = plus_plus.apply_circuit(&circuit).unwrap();
        let zz = [1.0, -1.0, -1.0, 1.0];
        for (k, (g, a)) in got.amplitudes().iter().zip(plus_plus.amplitudes()).enumerate() {
            let expected = a * Complex64::from_polar(1.0, -angle * zz[k]);
            assert!((g - expected).norm() < 1e-12);
        }
        assert!(zz_block(1, 1, 0.5f64).is_err());
    }

    #[test]
    fn combinatorial_gate_count() {
        let x = fv(vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]);
        let circuit = build_combinatorial(&x.values, 1).unwrap();
        let n = 6;
        let pairs = n * (n - 1) / 2;
        assert_eq!(circuit.gate_count(), n + n + 3 * pairs);
        assert_eq!(circuit.cnot_count(), 2 * pairs);

        // Four particles: 12 features, 66 ZZ blocks, 132 CNOTs.
        let x12 = fv((0..12).map(|i| 0.1 * i as f64).collect());
        let circuit = build_combinatorial(&x12.values, 1).unwrap();
        assert_eq!(circuit.cnot_count(), 132);
        assert!(build_combinatorial::<f64>(&[], 1).is_err());
    }

    #[test]
    fn combinatorial_layers_scale_gate_count() {
        let x = fv(vec![0.3, 0.7, 1.1]);
        let one = build_combinatorial(&x.values, 1).unwrap();
        let three = build_combinatorial(&x.values, 3).unwrap();
        assert_eq!(three.gate_count(), 3 * one.gate_count());
    }

    #[test]
    fn bloch_identity_input_stays_in_zero() {
        let x = fv(vec![0.0, 0.0, 0.9, 0.0, 0.0, 1.7]); // p~ = 0, theta = 0, phi arbitrary
        let state = encode_state(&x, &EncoderSpec::new(Strategy::BlochSphere, 2)).unwrap();
        let probs = state.probabilities();
        assert!((probs[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bloch_theta_pi_flips_qubit() {
        let x = fv(vec![0.4, PI, 0.3]);
        let state = encode_state(&x, &EncoderSpec::new(Strategy::BlochSphere, 1)).unwrap();
        let probs = state.probabilities();
        assert!(probs[0].abs() < 1e-12);
        assert!((probs[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bloch_probabilities_factorise_as_product_state() {
        let x = fv(vec![0.7, 1.1, 0.2, 2.1, 0.4, 5.0, 1.4, 2.8, 3.3]);
        let spec = EncoderSpec::new(Strategy::BlochSphere, 2);
        let joint = encode_state(&x, &spec).unwrap().probabilities();
        let mut singles: Vec<Vec<f64>> = Vec::new();
        for i in 0..3 {
            let sub = fv(x.values[3 * i..3 * i + 3].to_vec());
            singles.push(encode_state(&sub, &spec).unwrap().probabilities());
        }
        for (index, &p) in joint.iter().enumerate() {
            let product: f64 = (0..3).map(|q| singles[q][(index >> q) & 1]).product();
            assert!((p - product).abs() < 1e-12, "index {index}");
        }
    }

    #[test]
    fn separate_particle_block_counts() {
        let one_particle = fv(vec![0.5, 1.0, 1.5]);
        let circuit = build_separate_particle(&one_particle, 1).unwrap();
        // One intra ZZ block, no inter blocks.
        assert_eq!(circuit.cnot_count(), 2);

        let four = fv((0..12).map(|i| 0.2 * i as f64).collect());
        let circuit4 = build_separate_particle(&four, 1).unwrap();
        // 4 intra + C(4,2) inter blocks per layer.
        assert_eq!(circuit4.cnot_count(), 2 * (4 + 6));
        let combinatorial = build_combinatorial(&four.values, 1).unwrap();
        assert!(circuit4.cnot_count() < combinatorial.cnot_count());
        assert_eq!(combinatorial.cnot_count(), 132);
    }

    #[test]
    fn separate_particle_bloch_layout_and_counts() {
        let three = fv((0..9).map(|i| 0.3 * i as f64).collect());
        let spec = EncoderSpec::new(Strategy::SeparateParticleBloch, 1);
        let circuit = build_circuit(&three, &spec).unwrap();
        // Three particles on a 6-qubit register.
        assert_eq!(circuit.n_qubits(), 6);
        // Without intra entanglement only the C(3,2) inter blocks remain.
        assert_eq!(circuit.cnot_count(), 2 * 3);
        let with_intra = build_separate_particle_bloch(&three, 1, true).unwrap();
        assert_eq!(with_intra.cnot_count(), 2 * (3 + 3));
    }

    #[test]
    fn cnot_ordering_across_strategies() {
        for particles in 3..=5 {
            let x = fv((0..3 * particles).map(|i| 0.1 * i as f64 + 0.05).collect());
            let spb = build_separate_particle_bloch(&x, 2, false).unwrap();
            let sp = build_separate_particle(&x, 2).unwrap();
            let comb = build_combinatorial(&x.values, 2).unwrap();
            assert!(spb.cnot_count() < sp.cnot_count());
            assert!(sp.cnot_count() < comb.cnot_count());
        }
    }

    #[test]
    fn separate_particle_bloch_trivial_input() {
        let x = fv(vec![0.0, 0.0, 0.0]);
        let state = encode_state(
            &x,
            &EncoderSpec::new(Strategy::SeparateParticleBloch, 1),
        )
        .unwrap();
        // Angle qubit (0) stays |0>, momentum qubit (1) becomes |+>.
        let amps = state.amplitudes();
        assert!((amps[0].norm_sqr() - 0.5).abs() < 1e-12);
        assert!((amps[2].norm_sqr() - 0.5).abs() < 1e-12);
        assert!(amps[1].norm() < 1e-12);
        assert!(amps[3].norm() < 1e-12);
    }

    #[test]
    fn every_strategy_yields_normalised_state_and_unit_self_fidelity() {
        let x = fv(vec![0.3, 1.2, 4.0, 2.2, 0.4, 1.0, 3.1, 2.0, 0.7]);
        for strategy in Strategy::ALL {
            let spec = EncoderSpec::new(strategy, 2).with_intra(true);
            let state = encode_state(&x, &spec).unwrap();
            assert!((state.norm_sqr() - 1.0).abs() < 1e-10, "{strategy:?}");
            let again = encode_state(&x, &spec).unwrap();
            assert!((fidelity(&state, &again) - 1.0).abs() < 1e-10, "{strategy:?}");
        }
    }

    #[test]
    fn builders_are_deterministic() {
        let x = fv(vec![0.9, 0.1, 2.4, 1.7, 3.0, 0.2]);
        for strategy in Strategy::ALL {
            let spec = EncoderSpec::new(strategy, 3).with_intra(true);
            let a = build_circuit(&x, &spec).unwrap();
            let b = build_circuit(&x, &spec).unwrap();
            assert_eq!(a.gates(), b.gates());
        }
    }

    #[test]
    fn swapping_particles_keeps_fidelity_bounded() {
        let x = fv(vec![0.3, 1.2, 4.0, 2.2, 0.4, 1.0]);
        let mut swapped_values = x.values.clone();
        swapped_values.rotate_left(3);
        let swapped = fv(swapped_values);
        for strategy in Strategy::ALL {
            let spec = EncoderSpec::new(strategy, 1).with_intra(true);
            let a = encode_state(&x, &spec).unwrap();
            let b = encode_state(&swapped, &spec).unwrap();
            let f = fidelity(&a, &b);
            assert!(f <= 1.0 + 1e-10, "{strategy:?}");
        }
    }

    #[test]
    fn feature_length_validation() {
        let bad = fv(vec![0.1, 0.2, 0.3, 0.4]);
        assert!(matches!(
            build_separate_particle_bloch(&bad, 1, false),
            Err(Error::BadFeatureLength(4))
        ));
        assert!(EncoderSpec::new(Strategy::Combinatorial, 0).validate().is_err());
    }

    #[test]
    fn tag_round_trip() {
        for strategy in Strategy::ALL {
            let spec = EncoderSpec::new(strategy, 2).with_intra(strategy == Strategy::SeparateParticleBloch);
            let parsed = EncoderSpec::parse_tag(&spec.tag()).unwrap();
            assert_eq!(parsed, spec);
        }
    }
}
