//! Quantum-kernel support vector machines for collider event classification.
//!
//! The crate covers the full pipeline: synthetic event generation, thrust
//! frame preprocessing, four parameterised encoding circuits, exact and
//! shot-sampled quantum kernels on an in-process statevector simulator,
//! stochastic noise with measurement-error mitigation, an SMO-based SVM on
//! precomputed kernels, accuracy/ROC metrics, and the repeated-split
//! experiment protocol that ties them together.
//!
//! All numeric code is generic over [`scalar::Real`] (`f32` or `f64`); the
//! types re-exported at the crate root default to `f64`, which is what the
//! CLI, the file formats and the quoted tolerances use.

pub mod datagen;
pub mod encoders;
pub mod error;
pub mod experiment;
pub mod kernel;
mod linalg;
pub mod metrics;
pub mod noise;
pub mod preprocess;
mod rng;
pub mod scalar;
pub mod statevec;
pub mod svm;

pub use error::{Error, Result};
pub use scalar::Real;

pub use encoders::{EncoderSpec, Strategy};
pub use kernel::{CrossMatrix, KernelJob, KernelMatrix, KernelMeta};
pub use noise::{CalibrationMatrix, CalibrationMode, NoiseModel};
pub use preprocess::{Event, FeatureVector, Particle, ThrustFrameEvent};
pub use statevec::{Circuit, Gate, Statevector};
pub use svm::{SvmModel, TrainConfig};
