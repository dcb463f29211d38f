use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("cnot control and target are both qubit {0}")]
    CnotSameQubit(usize),

    #[error("refusing to allocate a statevector for {0} qubits (cap is 20)")]
    TooManyQubits(usize),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("amplitudes are not normalised: |psi|^2 = {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    #[error("shots must be at least 1")]
    ZeroShots,

    #[error("degenerate event: total momentum is zero")]
    DegenerateEvent,

    #[error("unphysical event: total energy {energy} <= |total momentum| {momentum}")]
    UnphysicalEvent { energy: f64, momentum: f64 },

    #[error("p_max must be positive, got {0}")]
    NonPositivePMax(f64),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("feature vector of length {0} does not describe whole particles (need a multiple of 3)")]
    BadFeatureLength(usize),

    #[error("rbf sigma must be positive, got {0}")]
    NonPositiveSigma(f64),

    #[error("training labels contain a single class")]
    SingleClass,

    #[error("label must be +1 or -1, got {0}")]
    BadLabel(i8),

    #[error("non-finite kernel entry at ({i}, {j})")]
    NonFiniteKernel { i: usize, j: usize },

    #[error("kernel entry ({i}, {j}) failed: {source}")]
    KernelEntry {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("non-finite score at index {0}")]
    NonFiniteScore(usize),

    #[error("invalid noise model: {0}")]
    BadNoiseModel(String),

    #[error("measurement mitigation unreliable: condition number {0:.3e} exceeds 1e6")]
    MitigationUnreliable(f64),

    #[error("invalid configuration: {0}")]
    BadConfig(String),

    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("{path} is not a valid {what} file: {msg}")]
    BadFileFormat {
        path: String,
        what: &'static str,
        msg: String,
    },

    #[error("checkpoint {path} does not match the requested computation: {msg}")]
    CheckpointMismatch { path: String, msg: String },

    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn open_file(path: &std::path::Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|source| Error::File {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn create_file(path: &std::path::Path) -> Result<std::fs::File> {
    std::fs::File::create(path).map_err(|source| Error::File {
        path: path.display().to_string(),
        source,
    })
}
