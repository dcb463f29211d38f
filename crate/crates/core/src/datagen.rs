//! Synthetic event generation standing in for the (private) collider data,
//! plus dataset persistence.
//!
//! Signal events scatter their particles isotropically; background events
//! collimate them into two back-to-back cones of configurable angular
//! spread, which is the jet-like/spherical contrast the classifier exploits.
//! Momenta are balanced to the centre-of-momentum frame and then snapped to
//! the event-file grid (nine decimal places, i.e. 1e-9 GeV/c) with the
//! balance re-closed in integer units, so a generated event round-trips
//! through its file representation bit-for-bit while keeping the total
//! momentum at zero to well below 1e-9.

use crate::error::{Error, Result};
use crate::preprocess::{Event, Particle};
use crate::rng::{fnv1a64, mix};
use crate::scalar::{real, Real};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

const HEADER: &str = "# qke-events v1";
const GRID: f64 = 1e9; // grid cells per GeV/c

/// Generator configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenConfig<T = f64> {
    pub n_particles: usize,
    pub events_per_class: usize,
    /// Angular standard deviation (radians) of the background jets.
    pub jet_spread: T,
    /// Target mean momentum magnitude (GeV/c).
    pub momentum_scale: T,
    pub seed: u64,
}

impl<T: Real> Default for GenConfig<T> {
    /// Four-particle events, the multiplicity of the main study.
    fn default() -> Self {
        GenConfig {
            n_particles: 4,
            events_per_class: 200,
            jet_spread: real(0.3),
            momentum_scale: T::one(),
            seed: 7,
        }
    }
}

impl<T: Real> GenConfig<T> {
    /// Three-particle preset matching the six-qubit studies.
    pub fn three_particle() -> Self {
        GenConfig { n_particles: 3, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles < 2 {
            return Err(Error::BadConfig("generator needs at least 2 particles".into()));
        }
        if self.jet_spread <= T::zero() || self.momentum_scale <= T::zero() {
            return Err(Error::BadConfig(
                "jet_spread and momentum_scale must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn event_rng(seed: u64, class_tag: &str, index: u64, attempt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(&[seed, fnv1a64(class_tag.as_bytes()), index, attempt]))
}

fn unit_sphere(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let z = 2.0 * rng.random::<f64>() - 1.0;
    let phi = 2.0 * std::f64::consts::PI * rng.random::<f64>();
    let r = (1.0 - z * z).max(0.0).sqrt();
    [r * phi.cos(), r * phi.sin(), z]
}

fn gaussian_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u = 1.0 - rng.random::<f64>(); // (0, 1]
    let v = rng.random::<f64>();
    let radius = (-2.0 * u.ln()).sqrt();
    let angle = 2.0 * std::f64::consts::PI * v;
    (radius * angle.cos(), radius * angle.sin())
}

fn magnitude(rng: &mut ChaCha8Rng, scale: f64) -> f64 {
    scale * (0.4 + 1.2 * rng.random::<f64>())
}

/// Balance to zero total momentum and pin the mean magnitude to `scale`.
fn recoil_correct(momenta: &mut [[f64; 3]], scale: f64) {
    let n = momenta.len() as f64;
    let mut mean = [0.0; 3];
    for m in momenta.iter() {
        for axis in 0..3 {
            mean[axis] += m[axis] / n;
        }
    }
    for m in momenta.iter_mut() {
        for axis in 0..3 {
            m[axis] -= mean[axis];
        }
    }
    let mean_magnitude: f64 = momenta
        .iter()
        .map(|m| (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt())
        .sum::<f64>()
        / n;
    if mean_magnitude > 0.0 {
        let factor = scale / mean_magnitude;
        for m in momenta.iter_mut() {
            for axis in 0..3 {
                m[axis] *= factor;
            }
        }
    }
}

/// Snap each component to the file grid and re-close the momentum balance
/// exactly in integer grid units.
fn quantize_balanced(momenta: &[[f64; 3]]) -> Vec<[f64; 3]> {
    let n = momenta.len();
    let mut cells: Vec<[i64; 3]> = momenta
        .iter()
        .map(|m| {
            [
                (m[0] * GRID).round() as i64,
                (m[1] * GRID).round() as i64,
                (m[2] * GRID).round() as i64,
            ]
        })
        .collect();
    for axis in 0..3 {
        let total: i64 = cells.iter().map(|c| c[axis]).sum();
        let share = total.div_euclid(n as i64);
        let remainder = total.rem_euclid(n as i64) as usize;
        for cell in cells.iter_mut() {
            cell[axis] -= share;
        }
        for cell in cells.iter_mut().take(remainder) {
            cell[axis] -= 1;
        }
    }
    cells
        .into_iter()
        .map(|c| [c[0] as f64 / GRID, c[1] as f64 / GRID, c[2] as f64 / GRID])
        .collect()
}

fn build_event<T: Real>(momenta: Vec<[f64; 3]>, label: i8) -> Event<T> {
    Event::new(
        momenta
            .into_iter()
            .map(|m| Particle::new(real(m[0]), real(m[1]), real(m[2])))
            .collect(),
        Some(label),
    )
}

fn generate_with<T: Real, F>(cfg: &GenConfig<T>, class_tag: &str, index: u64, label: i8, draw: F) -> Result<Event<T>>
where
    F: Fn(&mut ChaCha8Rng, usize, f64) -> Vec<[f64; 3]>,
{
    cfg.validate()?;
    let scale = cfg.momentum_scale.to_f64().unwrap();
    for attempt in 0..100 {
        let mut rng = event_rng(cfg.seed, class_tag, index, attempt);
        let mut momenta = draw(&mut rng, cfg.n_particles, scale);
        recoil_correct(&mut momenta, scale);
        // Reject events where recoil correction crushed a particle.
        let min_magnitude = momenta
            .iter()
            .map(|m| (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt())
            .fold(f64::INFINITY, f64::min);
        if min_magnitude < 0.05 * scale {
            continue;
        }
        return Ok(build_event(quantize_balanced(&momenta), label));
    }
    Err(Error::BadConfig(
        "event generation failed to produce non-degenerate momenta".into(),
    ))
}

/// One spherically distributed signal event (label +1).
pub fn generate_signal<T: Real>(cfg: &GenConfig<T>, index: u64) -> Result<Event<T>> {
    generate_with(cfg, "signal", index, 1, |rng, n, scale| {
        (0..n)
            .map(|_| {
                let dir = unit_sphere(rng);
                let mag = magnitude(rng, scale);
                [dir[0] * mag, dir[1] * mag, dir[2] * mag]
            })
            .collect()
    })
}

/// One jet-like background event (label -1): two back-to-back cones of
/// angular spread `jet_spread` about a random axis.
pub fn generate_background<T: Real>(cfg: &GenConfig<T>, index: u64) -> Result<Event<T>> {
    let spread = cfg.jet_spread.to_f64().unwrap();
    generate_with(cfg, "background", index, -1, move |rng, n, scale| {
        let axis = unit_sphere(rng);
        // Any two directions orthogonal to the axis span the tangent plane.
        let helper = if axis[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let mut t1 = [
            axis[1] * helper[2] - axis[2] * helper[1],
            axis[2] * helper[0] - axis[0] * helper[2],
            axis[0] * helper[1] - axis[1] * helper[0],
        ];
        let t1_len = (t1[0] * t1[0] + t1[1] * t1[1] + t1[2] * t1[2]).sqrt();
        for v in t1.iter_mut() {
            *v /= t1_len;
        }
        let t2 = [
            axis[1] * t1[2] - axis[2] * t1[1],
            axis[2] * t1[0] - axis[0] * t1[2],
            axis[0] * t1[1] - axis[1] * t1[0],
        ];
        (0..n)
            .map(|k| {
                let side = if k % 2 == 0 { 1.0 } else { -1.0 };
                let (gx, gy) = gaussian_pair(rng);
                let mut dir = [0.0; 3];
                for axis_index in 0..3 {
                    dir[axis_index] = side * axis[axis_index]
                        + spread * (gx * t1[axis_index] + gy * t2[axis_index]);
                }
                let len = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
                let mag = magnitude(rng, scale);
                [dir[0] / len * mag, dir[1] / len * mag, dir[2] / len * mag]
            })
            .collect()
    })
}

/// The full pool: `events_per_class` signal events followed by the same
/// number of background events.
pub fn generate_dataset<T: Real>(cfg: &GenConfig<T>) -> Result<Vec<Event<T>>> {
    cfg.validate()?;
    let signals: Vec<Event<T>> = (0..cfg.events_per_class as u64)
        .into_par_iter()
        .map(|index| generate_signal(cfg, index))
        .collect::<Result<_>>()?;
    let backgrounds: Vec<Event<T>> = (0..cfg.events_per_class as u64)
        .into_par_iter()
        .map(|index| generate_background(cfg, index))
        .collect::<Result<_>>()?;
    Ok(signals.into_iter().chain(backgrounds).collect())
}

/// Write events as line records `label,n,px1,py1,pz1,...` (nine decimal
/// places) under a version header. Unlabeled events store label 0.
pub fn write_events<T: Real>(path: &Path, events: &[Event<T>]) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    writeln!(writer, "{HEADER}")?;
    for event in events {
        let label = event.label.unwrap_or(0);
        write!(writer, "{label},{}", event.particles.len())?;
        for particle in &event.particles {
            write!(
                writer,
                ",{:.9},{:.9},{:.9}",
                particle.px.to_f64().unwrap(),
                particle.py.to_f64().unwrap(),
                particle.pz.to_f64().unwrap()
            )?;
        }
        writeln!(writer)?;
    }
    writer.flush()?;
    Ok(())
}

/// Read an event file written by [`write_events`].
pub fn read_events<T: Real>(path: &Path) -> Result<Vec<Event<T>>> {
    let reader = BufReader::new(File::open(path)?);
    let path_string = path.display().to_string();
    let parse_err = |line: usize, msg: String| Error::Parse { path: path_string.clone(), line, msg };

    let mut events = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line_no = index + 1;
        let line = line?;
        let trimmed = line.trim();
        if line_no == 1 {
            if trimmed != HEADER {
                return Err(parse_err(1, format!("expected header `{HEADER}`")));
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() < 2 {
            return Err(parse_err(line_no, "record needs at least label and count".into()));
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
        if count == 0 {
            return Err(parse_err(line_no, "event needs at least one particle".into()));
        }
        if fields.len() != 2 + 3 * count {
            return Err(parse_err(
                line_no,
                format!("expected {} fields, got {}", 2 + 3 * count, fields.len()),
            ));
        }
        let mut particles = Vec::with_capacity(count);
        for k in 0..count {
            let mut components = [0.0f64; 3];
            for (axis, component) in components.iter_mut().enumerate() {
                let raw = fields[2 + 3 * k + axis];
                *component = raw
                    .parse::<f64>()
                    .map_err(|_| parse_err(line_no, format!("bad momentum `{raw}`")))?;
                if !component.is_finite() {
                    return Err(parse_err(line_no, format!("non-finite momentum `{raw}`")));
                }
            }
            particles.push(Particle::new(
                real(components[0]),
                real(components[1]),
                real(components[2]),
            ));
        }
        events.push(Event::new(particles, label));
    }
    Ok(events)
}
