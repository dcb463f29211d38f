//! Event preprocessing: centre-of-momentum boost, thrust axis, rotation into
//! the thrust frame and feature normalisation.
//!
//! The output features per particle are `(p~, theta, phi)` with
//! `p~ = p * pi / p_max` in `[0, pi]`, `theta in [0, pi]` measured from the
//! thrust axis and `phi in [0, 2*pi)` measured about it against a fixed
//! reference perpendicular.

use crate::error::{Error, Result};
use crate::scalar::{real, Real};

/// A particle's 3-momentum in GeV/c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle<T = f64> {
    pub px: T,
    pub py: T,
    pub pz: T,
}

impl<T: Real> Particle<T> {
    pub fn new(px: T, py: T, pz: T) -> Self {
        Particle { px, py, pz }
    }

    pub fn momentum(&self) -> [T; 3] {
        [self.px, self.py, self.pz]
    }

    pub fn p(&self) -> T {
        dot(self.momentum(), self.momentum()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.px.is_finite() && self.py.is_finite() && self.pz.is_finite()
    }
}

/// One collision event: particle momenta plus an optional class label
/// (+1 signal, -1 background; `None` for unlabeled inference).
#[derive(Debug, Clone, PartialEq)]
pub struct Event<T = f64> {
    pub particles: Vec<Particle<T>>,
    pub label: Option<i8>,
}

impl<T: Real> Event<T> {
    pub fn new(particles: Vec<Particle<T>>, label: Option<i8>) -> Self {
        Event { particles, label }
    }

    pub fn total_momentum(&self) -> [T; 3] {
        let mut total = [T::zero(); 3];
        for particle in &self.particles {
            total = add(total, particle.momentum());
        }
        total
    }
}

/// Per-particle momentum in spherical coordinates about the thrust axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalMomentum<T = f64> {
    pub p: T,
    pub theta: T,
    pub phi: T,
}

/// An event rotated into its thrust frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ThrustFrameEvent<T = f64> {
    pub spherical: Vec<SphericalMomentum<T>>,
    pub thrust_axis: [T; 3],
    pub thrust_value: T,
}

/// Flat circuit-parameter array `[p~_1, theta_1, phi_1, ..., p~_k, theta_k, phi_k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<T = f64> {
    pub values: Vec<T>,
    /// How many momenta exceeded `p_max` and were clamped to `pi`.
    pub clamped: usize,
}

impl<T: Real> FeatureVector<T> {
    pub fn particle_count(&self) -> usize {
        self.values.len() / 3
    }

    /// `(p~, theta, phi)` of particle `i`.
    pub fn particle(&self, i: usize) -> (T, T, T) {
        (self.values[3 * i], self.values[3 * i + 1], self.values[3 * i + 2])
    }
}

#[inline]
fn dot<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn add<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
fn scale<T: Real>(a: [T; 3], s: T) -> [T; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
fn sub<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
fn cross<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn norm<T: Real>(a: [T; 3]) -> T {
    dot(a, a).sqrt()
}

/// The 20 dodecahedron vertex directions, a deterministic icosahedral spread
/// of seed axes for the thrust ascent.
fn seed_directions<T: Real>() -> Vec<[T; 3]> {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let inv = 1.0 / phi;
    let mut dirs: Vec<[f64; 3]> = Vec::with_capacity(20);
    for &sx in &[1.0, -1.0] {
        for &sy in &[1.0, -1.0] {
            for &sz in &[1.0, -1.0] {
                dirs.push([sx, sy, sz]);
            }
        }
    }
    for &sa in &[1.0, -1.0] {
        for &sb in &[1.0, -1.0] {
            dirs.push([0.0, sa * inv, sb * phi]);
            dirs.push([sa * inv, sb * phi, 0.0]);
            dirs.push([sa * phi, 0.0, sb * inv]);
        }
    }
    dirs.into_iter()
        .map(|d| {
            let len = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            [real(d[0] / len), real(d[1] / len), real(d[2] / len)]
        })
        .collect()
}

fn thrust_of<T: Real>(momenta: &[[T; 3]], axis: [T; 3], momentum_sum: T) -> T {
    let numerator: T = momenta.iter().map(|&p| dot(p, axis).abs()).sum();
    numerator / momentum_sum
}

/// Flip the axis, if needed, to the canonical half-space: nonnegative z,
/// ties broken towards nonnegative y, then x.
fn canonicalize<T: Real>(axis: [T; 3]) -> [T; 3] {
    let tie: T = real(1e-12);
    let flip = if axis[2] > tie {
        false
    } else if axis[2] < -tie {
        true
    } else if axis[1] > tie {
        false
    } else if axis[1] < -tie {
        true
    } else {
        axis[0] < T::zero()
    };
    if flip {
        scale(axis, -T::one())
    } else {
        axis
    }
}

/// Thrust axis and thrust value of an event.
///
/// Maximises `T(n) = sum_i |P_i . n| / sum_i |P_i|` by the fixed-point ascent
/// `n <- normalize(sum_i sign(P_i . n) P_i)` started from 20 icosahedrally
/// spread directions; the best local maximum wins. `n` and `-n` are
/// equivalent, so the result is canonicalized to nonnegative z (ties: y, x).
pub fn thrust_axis<T: Real>(event: &Event<T>) -> Result<([T; 3], T)> {
    let momenta: Vec<[T; 3]> = event.particles.iter().map(|p| p.momentum()).collect();
    let momentum_sum: T = momenta.iter().map(|&p| norm(p)).sum();
    if momenta.is_empty() || momentum_sum <= T::zero() {
        return Err(Error::DegenerateEvent);
    }

    let mut best_axis = [T::zero(), T::zero(), T::one()];
    let mut best_value = T::neg_infinity();
    for seed in seed_directions::<T>() {
        let mut axis = seed;
        for _ in 0..64 {
            let mut summed = [T::zero(); 3];
            for &p in &momenta {
                let sign = if dot(p, axis) >= T::zero() { T::one() } else { -T::one() };
                summed = add(summed, scale(p, sign));
            }
            let len = norm(summed);
            if len <= T::zero() {
                break;
            }
            let next = scale(summed, T::one() / len);
            let moved = sub(next, axis);
            axis = next;
            if norm(moved) < real(1e-15) {
                break;
            }
        }
        let value = thrust_of(&momenta, axis, momentum_sum);
        if value > best_value {
            best_value = value;
            best_axis = axis;
        }
    }
    Ok((canonicalize(best_axis), best_value))
}

/// Boost an event to its centre-of-momentum frame.
///
/// With `energies` absent the particles are treated as massless (`E = |p|`).
/// The returned event has total 3-momentum zero to within 1e-9 GeV/c.
pub fn boost_to_cm<T: Real>(event: &Event<T>, energies: Option<&[T]>) -> Result<Event<T>> {
    if event.particles.is_empty() {
        return Err(Error::EmptyInput("event has no particles"));
    }
    let energy_of = |i: usize| -> T {
        match energies {
            Some(e) => e[i],
            None => event.particles[i].p(),
        }
    };
    if let Some(e) = energies {
        if e.len() != event.particles.len() {
            return Err(Error::DimensionMismatch {
                expected: event.particles.len(),
                actual: e.len(),
            });
        }
    }
    let total_p = event.total_momentum();
    let total_e: T = (0..event.particles.len()).map(&energy_of).sum();
    let p_mag = norm(total_p);
    if total_e <= p_mag {
        return Err(Error::UnphysicalEvent {
            energy: total_e.to_f64().unwrap_or(f64::NAN),
            momentum: p_mag.to_f64().unwrap_or(f64::NAN),
        });
    }
    if p_mag == T::zero() {
        return Ok(event.clone());
    }

    let beta_mag = p_mag / total_e;
    let beta_hat = scale(total_p, T::one() / p_mag);
    let gamma = T::one() / (T::one() - beta_mag * beta_mag).sqrt();

    let particles = event
        .particles
        .iter()
        .enumerate()
        .map(|(i, particle)| {
            let p = particle.momentum();
            let p_par = dot(p, beta_hat);
            let p_perp = sub(p, scale(beta_hat, p_par));
            let p_par_boosted = gamma * (p_par - beta_mag * energy_of(i));
            let boosted = add(p_perp, scale(beta_hat, p_par_boosted));
            Particle::new(boosted[0], boosted[1], boosted[2])
        })
        .collect();
    Ok(Event::new(particles, event.label))
}

/// Deterministic perpendicular reference frame about an axis: `e1` is the
/// perpendicular component of the global x axis (falling back to y when the
/// axis is within 1e-6 of x), `e2` completes the right-handed triad.
fn frame_basis<T: Real>(axis: [T; 3]) -> ([T; 3], [T; 3]) {
    let x_hat = [T::one(), T::zero(), T::zero()];
    let y_hat = [T::zero(), T::one(), T::zero()];
    let mut reference = sub(x_hat, scale(axis, dot(x_hat, axis)));
    if norm(reference) < real(1e-6) {
        reference = sub(y_hat, scale(axis, dot(y_hat, axis)));
    }
    let e1 = scale(reference, T::one() / norm(reference));
    let e2 = cross(axis, e1);
    (e1, e2)
}

/// `(p, theta, phi)` of a momentum about an axis with reference frame
/// `(e1, e2)`; `theta in [0, pi]`, `phi in [-pi, pi)`.
fn spherical_about<T: Real>(p_vec: [T; 3], axis: [T; 3], e1: [T; 3], e2: [T; 3]) -> SphericalMomentum<T> {
    let p = norm(p_vec);
    if p == T::zero() {
        return SphericalMomentum { p, theta: T::zero(), phi: T::zero() };
    }
    let cos_theta = (dot(p_vec, axis) / p).max(-T::one()).min(T::one());
    let theta = cos_theta.acos();
    let mut phi = dot(p_vec, e2).atan2(dot(p_vec, e1));
    if phi >= T::PI() {
        phi -= real::<T>(2.0) * T::PI();
    }
    SphericalMomentum { p, theta, phi }
}

/// Express every particle in spherical coordinates about the thrust axis.
///
/// The origin of `phi` is physically arbitrary but deterministic (see
/// [`frame_basis`]).
pub fn to_thrust_frame<T: Real>(event: &Event<T>) -> Result<ThrustFrameEvent<T>> {
    let (axis, value) = thrust_axis(event)?;
    let (e1, e2) = frame_basis(axis);
    let spherical = event
        .particles
        .iter()
        .map(|particle| spherical_about(particle.momentum(), axis, e1, e2))
        .collect();
    Ok(ThrustFrameEvent {
        spherical,
        thrust_axis: axis,
        thrust_value: value,
    })
}

/// Map a thrust-frame event onto circuit parameters.
///
/// `p~ = p * pi / p_max`, clamped to `pi` when `p > p_max` (the clamp count is
/// recorded); `theta` passes through; `phi` is shifted to `[0, 2*pi)`.
pub fn normalize<T: Real>(tfe: &ThrustFrameEvent<T>, p_max: T) -> Result<FeatureVector<T>> {
    if p_max <= T::zero() {
        return Err(Error::NonPositivePMax(p_max.to_f64().unwrap_or(f64::NAN)));
    }
    let pi = T::PI();
    let two_pi = real::<T>(2.0) * pi;
    let mut values = Vec::with_capacity(3 * tfe.spherical.len());
    let mut clamped = 0;
    for s in &tfe.spherical {
        let mut p_scaled = s.p * pi / p_max;
        if p_scaled > pi {
            p_scaled = pi;
            clamped += 1;
        }
        let mut phi = s.phi;
        if phi < T::zero() {
            phi += two_pi;
        }
        if phi >= two_pi {
            phi = T::zero();
        }
        values.push(p_scaled);
        values.push(s.theta);
        values.push(phi);
    }
    Ok(FeatureVector { values, clamped })
}

/// Boost every event to its centre-of-momentum frame (massless kinematics).
pub fn boost_all<T: Real>(events: &[Event<T>]) -> Result<Vec<Event<T>>> {
    events.iter().map(|e| boost_to_cm(e, None)).collect()
}

/// Thrust-frame features for a batch of already-boosted events.
pub fn featurize<T: Real>(boosted: &[Event<T>], p_max: T) -> Result<Vec<FeatureVector<T>>> {
    boosted
        .iter()
        .map(|e| normalize(&to_thrust_frame(e)?, p_max))
        .collect()
}

/// Highest momentum magnitude over all particles of all provided collections.
pub fn compute_p_max<T: Real>(collections: &[&[Event<T>]]) -> Result<T> {
    let mut best: Option<T> = None;
    for collection in collections {
        for event in *collection {
            for particle in &event.particles {
                let p = particle.p();
                best = Some(match best {
                    Some(b) if b >= p => b,
                    _ => p,
                });
            }
        }
    }
    best.ok_or(Error::EmptyInput("no particles in any collection"))
}

const FEATURE_HEADER: &str = "# qke-features v1";

/// Write feature vectors with their labels and the `p_max` they were scaled
/// by: a `p_max` record, then `label,k,p1,theta1,phi1,...` lines in full
/// round-trip precision.
pub fn write_features<T: Real>(
    path: &std::path::Path,
    features: &[FeatureVector<T>],
    labels: &[Option<i8>],
    p_max: T,
) -> Result<()> {
    use std::io::Write;
    if features.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: features.len(),
            actual: labels.len(),
        });
    }
    let mut writer = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(writer, "{FEATURE_HEADER}")?;
    writeln!(writer, "p_max,{}", p_max.to_f64().unwrap())?;
    for (feature, label) in features.iter().zip(labels) {
        write!(writer, "{},{}", label.unwrap_or(0), feature.particle_count())?;
        for value in &feature.values {
            write!(writer, ",{}", value.to_f64().unwrap())?;
        }
        writeln!(writer)?;
    }
    writer.flush()?;
    Ok(())
}

/// Read a feature file written by [`write_features`].
pub fn read_features<T: Real>(
    path: &std::path::Path,
) -> Result<(Vec<FeatureVector<T>>, Vec<Option<i8>>, T)> {
    use std::io::BufRead;
    let reader = std::io::BufReader::new(std::fs::File::open(path)?);
    let path_string = path.display().to_string();
    let parse_err = |line: usize, msg: String| Error::Parse { path: path_string.clone(), line, msg };

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut p_max: Option<T> = None;
    for (index, line) in reader.lines().enumerate() {
        let line_no = index + 1;
        let line = line?;
        let trimmed = line.trim();
        if line_no == 1 {
            if trimmed != FEATURE_HEADER {
                return Err(parse_err(1, format!("expected header `{FEATURE_HEADER}`")));
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        if let Some(value) = trimmed.strip_prefix("p_max,") {
            let parsed = value
                .parse::<f64>()
                .ok()
                .and_then(T::from_f64)
                .ok_or_else(|| parse_err(line_no, format!("bad p_max `{value}`")))?;
            p_max = Some(parsed);
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() < 2 {
            return Err(parse_err(line_no, "record needs label and particle count".into()));
        }
        let label: i8 = fields[0]
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad label `{}`", fields[0])))?;
        let label = match label {
            0 => None,
            1 | -1 => Some(label),
            other => return Err(parse_err(line_no, format!("label must be -1, 0 or 1, got {other}"))),
        };
        let count: usize = fields[1]
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad particle count `{}`", fields[1])))?;
        if fields.len() != 2 + 3 * count {
            return Err(parse_err(
                line_no,
                format!("expected {} fields, got {}", 2 + 3 * count, fields.len()),
            ));
        }
        let mut values = Vec::with_capacity(3 * count);
        for raw in &fields[2..] {
            let value = raw
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .and_then(T::from_f64)
                .ok_or_else(|| parse_err(line_no, format!("bad feature value `{raw}`")))?;
            values.push(value);
        }
        features.push(FeatureVector { values, clamped: 0 });
        labels.push(label);
    }
    let p_max = p_max.ok_or_else(|| parse_err(0, "missing p_max record".into()))?;
    Ok((features, labels, p_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn event(momenta: &[[f64; 3]]) -> Event<f64> {
        Event::new(
            momenta.iter().map(|m| Particle::new(m[0], m[1], m[2])).collect(),
            None,
        )
    }

    fn random_event(rng: &mut ChaCha8Rng, n: usize) -> Event<f64> {
        let momenta: Vec<[f64; 3]> = (0..n)
            .map(|_| {
                [
                    rng.random::<f64>() * 2.0 - 1.0,
                    rng.random::<f64>() * 2.0 - 1.0,
                    rng.random::<f64>() * 2.0 - 1.0,
                ]
            })
            .collect();
        event(&momenta)
    }

    /// Brute-force oracle: scan a large direction grid over the upper
    /// hemisphere, then refine the best grid point by sign-iteration ascent.
    fn thrust_grid_oracle(event: &Event<f64>, grid_points: usize) -> ([f64; 3], f64) {
        let momenta: Vec<[f64; 3]> = event.particles.iter().map(|p| p.momentum()).collect();
        let total: f64 = momenta.iter().map(|m| super::norm(*m)).sum();
        let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
        let mut best = ([0.0, 0.0, 1.0], f64::MIN);
        for k in 0..grid_points {
            // Fibonacci spiral over the upper hemisphere (z in (0, 1]).
            let z = 1.0 - (k as f64 + 0.5) / grid_points as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            let axis = [r * phi.cos(), r * phi.sin(), z];
            let value: f64 = momenta.iter().map(|m| super::dot(*m, axis).abs()).sum::<f64>() / total;
            if value > best.1 {
                best = (axis, value);
            }
        }
        let mut axis = best.0;
        for _ in 0..200 {
            let mut summed = [0.0; 3];
            for m in &momenta {
                let sign = if super::dot(*m, axis) >= 0.0 { 1.0 } else { -1.0 };
                summed = super::add(summed, super::scale(*m, sign));
            }
            let len = super::norm(summed);
            if len == 0.0 {
                break;
            }
            let next = super::scale(summed, 1.0 / len);
            if super::norm(super::sub(next, axis)) < 1e-15 {
                axis = next;
                break;
            }
            axis = next;
        }
        let value: f64 = momenta.iter().map(|m| super::dot(*m, axis).abs()).sum::<f64>() / total;
        (super::canonicalize(axis), value)
    }

    #[test]
    fn back_to_back_particles_give_unit_thrust_along_z() {
        let e = event(&[[0.0, 0.0, 1.3], [0.0, 0.0, -1.3]]);
        let (axis, value) = thrust_axis(&e).unwrap();
        assert!((axis[2] - 1.0).abs() < 1e-12);
        assert!((value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_particle_thrust_is_its_direction() {
        let e = event(&[[0.3, -0.4, 0.5]]);
        let (axis, value) = thrust_axis(&e).unwrap();
        let expected_len = (0.3f64 * 0.3 + 0.4 * 0.4 + 0.5 * 0.5).sqrt();
        assert!((value - 1.0).abs() < 1e-12);
        assert!((axis[0] - 0.3 / expected_len).abs() < 1e-9);
        assert!((axis[1] + 0.4 / expected_len).abs() < 1e-9);
        assert!((axis[2] - 0.5 / expected_len).abs() < 1e-9);
    }

    #[test]
    fn all_zero_momenta_is_degenerate() {
        let e = event(&[[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]);
        assert!(matches!(thrust_axis(&e), Err(Error::DegenerateEvent)));
    }

    #[test]
    fn thrust_matches_grid_oracle_on_random_events() {
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        for _ in 0..10 {
            let e = random_event(&mut rng, 4);
            let (axis, value) = thrust_axis(&e).unwrap();
            let (oracle_axis, oracle_value) = thrust_grid_oracle(&e, 1_000_000);
            assert!((value - oracle_value).abs() < 1e-9, "thrust value drifted");
            let cosine = super::dot(axis, oracle_axis).abs().min(1.0);
            assert!(cosine.acos().to_degrees() < 0.5, "axis off by {}", cosine.acos().to_degrees());
        }
    }

    #[test]
    fn boost_leaves_cm_event_unchanged() {
        let e = event(&[[0.4, 0.1, -0.3], [-0.4, -0.1, 0.3]]);
        let boosted = boost_to_cm(&e, None).unwrap();
        for (a, b) in e.particles.iter().zip(boosted.particles.iter()) {
            assert!((a.px - b.px).abs() < 1e-12);
            assert!((a.py - b.py).abs() < 1e-12);
            assert!((a.pz - b.pz).abs() < 1e-12);
        }
    }

    #[test]
    fn boost_zeroes_total_momentum() {
        let e = event(&[[1.0, 0.2, 0.0], [0.4, -0.1, 0.3]]);
        let boosted = boost_to_cm(&e, None).unwrap();
        let total = boosted.total_momentum();
        assert!(super::norm(total) < 1e-9, "residual {:?}", total);
    }

    #[test]
    fn boost_preserves_invariant_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let e = random_event(&mut rng, 4);
            let mass_of = |ev: &Event<f64>| {
                let energy: f64 = ev.particles.iter().map(|p| p.p()).sum();
                let p = super::norm(ev.total_momentum());
                (energy * energy - p * p).sqrt()
            };
            let before = mass_of(&e);
            let after = mass_of(&boost_to_cm(&e, None).unwrap());
            assert!((before - after).abs() < 1e-9, "{before} vs {after}");
        }
    }

    #[test]
    fn unphysical_event_rejected() {
        // A single massless particle cannot be boosted to rest.
        let e = event(&[[1.0, 0.0, 0.0]]);
        assert!(matches!(boost_to_cm(&e, None), Err(Error::UnphysicalEvent { .. })));
    }

    #[test]
    fn thrust_frame_angles() {
        // Back-to-back pair: the axis is exactly z, so the aligned particle
        // sits at theta = 0 and its partner at theta = pi.
        let e = event(&[[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]);
        let tfe = to_thrust_frame(&e).unwrap();
        assert!(tfe.spherical[0].theta.abs() < 1e-12);
        assert!((tfe.spherical[1].theta - std::f64::consts::PI).abs() < 1e-12);

        // The coordinate map sends a momentum perpendicular to the axis to
        // theta = pi/2 exactly.
        let axis = [0.0, 0.0, 1.0];
        let (e1, e2) = frame_basis(axis);
        let s = spherical_about([0.5, 0.0, 0.0], axis, e1, e2);
        assert!((s.theta - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!(s.phi.abs() < 1e-12);
        let s = spherical_about([0.0, -0.7, 0.0], axis, e1, e2);
        assert!((s.phi + std::f64::consts::FRAC_PI_2).abs() < 1e-12);

        // |p| preserved by the rotation, on a generic event.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let generic = random_event(&mut rng, 5);
        let tfe = to_thrust_frame(&generic).unwrap();
        for (s, p) in tfe.spherical.iter().zip(generic.particles.iter()) {
            assert!((s.p - p.p()).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_definition_and_clamp() {
        let tfe = ThrustFrameEvent {
            spherical: vec![
                SphericalMomentum { p: 2.0, theta: 0.3, phi: -1.0 },
                SphericalMomentum { p: 0.0, theta: 1.0, phi: 1.0 },
                SphericalMomentum { p: 2.4, theta: 0.5, phi: 0.0 },
            ],
            thrust_axis: [0.0, 0.0, 1.0],
            thrust_value: 0.9,
        };
        let fv = normalize(&tfe, 2.0).unwrap();
        assert!((fv.values[0] - std::f64::consts::PI).abs() < 1e-12); // p == p_max
        assert_eq!(fv.values[3], 0.0); // p == 0
        assert!((fv.values[6] - std::f64::consts::PI).abs() < 1e-12); // clamped
        assert_eq!(fv.clamped, 1);
        // phi shifted into [0, 2*pi).
        assert!((fv.values[2] - (2.0 * std::f64::consts::PI - 1.0)).abs() < 1e-12);
        assert!(matches!(normalize(&tfe, 0.0), Err(Error::NonPositivePMax(_))));
    }

    #[test]
    fn p_max_is_global_maximum() {
        let a = vec![event(&[[1.0, 0.0, 0.0], [0.0, 2.5, 0.0], [0.0, 0.0, 0.3]])];
        assert!((compute_p_max(&[&a]).unwrap() - 2.5).abs() < 1e-12);
        let b = vec![event(&[[0.0, 0.0, 3.0]])];
        assert!((compute_p_max(&[&a, &b]).unwrap() - 3.0).abs() < 1e-12);

        // Brute-force scan over the flattened momenta agrees.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pool: Vec<Event<f64>> = (0..10).map(|_| random_event(&mut rng, 5)).collect();
        let flat_max = pool
            .iter()
            .flat_map(|e| e.particles.iter().map(|p| p.p()))
            .fold(f64::MIN, f64::max);
        assert!((compute_p_max(&[&pool]).unwrap() - flat_max).abs() < 1e-15);

        assert!(matches!(compute_p_max::<f64>(&[]), Err(Error::EmptyInput(_))));
    }

    fn rotate(e: &Event<f64>, angle: f64, axis: usize) -> Event<f64> {
        let (s, c) = angle.sin_cos();
        let particles = e
            .particles
            .iter()
            .map(|p| {
                let m = p.momentum();
                let rotated = match axis {
                    0 => [m[0], c * m[1] - s * m[2], s * m[1] + c * m[2]],
                    1 => [c * m[0] + s * m[2], m[1], -s * m[0] + c * m[2]],
                    _ => [c * m[0] - s * m[1], s * m[0] + c * m[1], m[2]],
                };
                Particle::new(rotated[0], rotated[1], rotated[2])
            })
            .collect();
        Event::new(particles, e.label)
    }

    #[test]
    fn thrust_value_is_rotation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for k in 0..8 {
            let e = random_event(&mut rng, 4);
            let (_, t0) = thrust_axis(&e).unwrap();
            let r = rotate(&e, 0.3 + 0.5 * k as f64, k % 3);
            let (_, t1) = thrust_axis(&r).unwrap();
            assert!((t0 - t1).abs() < 1e-9);
        }
    }

    #[test]
    fn features_rotation_invariant_up_to_common_phi_offset() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let e = random_event(&mut rng, 4);
        let fv0 = normalize(&to_thrust_frame(&e).unwrap(), 3.0).unwrap();
        let rotated = rotate(&e, 1.1, 2);
        let fv1 = normalize(&to_thrust_frame(&rotated).unwrap(), 3.0).unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        for i in 0..fv0.particle_count() {
            let (p0, t0, _) = fv0.particle(i);
            let (p1, t1, _) = fv1.particle(i);
            assert!((p0 - p1).abs() < 1e-9);
            assert!((t0 - t1).abs() < 1e-9);
        }
        // Pairwise phi differences (mod 2*pi) preserved.
        for i in 1..fv0.particle_count() {
            let d0 = (fv0.particle(i).2 - fv0.particle(0).2).rem_euclid(two_pi);
            let d1 = (fv1.particle(i).2 - fv1.particle(0).2).rem_euclid(two_pi);
            let diff = (d0 - d1).abs().min(two_pi - (d0 - d1).abs());
            assert!(diff < 1e-9, "pairwise phi difference drifted by {diff}");
        }
    }

    #[test]
    fn feature_file_round_trip() {
        let dir = std::env::temp_dir().join(format!("qksvm-features-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("a.features");
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let events: Vec<Event<f64>> = (0..5).map(|_| random_event(&mut rng, 3)).collect();
        let boosted = boost_all(&events).unwrap();
        let p_max = compute_p_max(&[&boosted]).unwrap();
        let features = featurize(&boosted, p_max).unwrap();
        let labels: Vec<Option<i8>> = vec![Some(1), Some(-1), None, Some(1), Some(-1)];
        write_features(&path, &features, &labels, p_max).unwrap();
        let (loaded, loaded_labels, loaded_p_max) = read_features::<f64>(&path).unwrap();
        assert_eq!(loaded_labels, labels);
        assert_eq!(loaded_p_max, p_max);
        for (a, b) in loaded.iter().zip(features.iter()) {
            assert_eq!(a.values, b.values);
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn thrust_value_in_valid_range(seed in 0u64..10_000, n in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let e = random_event(&mut rng, n);
            if e.particles.iter().any(|p| p.p() > 0.0) {
                let (axis, value) = thrust_axis(&e).unwrap();
                prop_assert!(value > 0.5 - 1e-9);
                prop_assert!(value <= 1.0 + 1e-12);
                prop_assert!((super::norm(axis) - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn feature_ranges_hold(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let e = random_event(&mut rng, 4);
            let tfe = to_thrust_frame(&e).unwrap();
            let p_max = tfe.spherical.iter().map(|s| s.p).fold(0.0, f64::max);
            if p_max > 0.0 {
                let fv = normalize(&tfe, p_max).unwrap();
                for i in 0..fv.particle_count() {
                    let (p, theta, phi) = fv.particle(i);
                    prop_assert!((0.0..=std::f64::consts::PI).contains(&p));
                    prop_assert!((0.0..=std::f64::consts::PI).contains(&theta));
                    prop_assert!(phi >= 0.0 && phi < 2.0 * std::f64::consts::PI);
                }
            }
        }
    }
}
