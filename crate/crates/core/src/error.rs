//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),

    #[error("coefficient not admissible: lhs = {lhs:.6e} must be < rhs = {rhs:.6e}")]
    NotAdmissible { lhs: f64, rhs: f64 },

    #[error("time horizon too short: T = {t} <= critical {critical:.6} (set allow_short_horizon to override)")]
    HorizonTooShort { t: f64, critical: f64 },

    #[error("weight overflow: exp({exponent:.3e}) is not finite for parameters lambda = {lambda}, s = {s}")]
    WeightOverflow { exponent: f64, lambda: f64, s: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("boundary constraint violated: |u({x}, {t})| = {value:.3e} exceeds 1e-12")]
    ConstraintViolation { x: f64, t: f64, value: f64 },

    #[error("point ({x}, {t}) outside the space-time domain")]
    OutOfDomain { x: f64, t: f64 },

    #[error("unsupported derivative order {0} (max 2)")]
    UnsupportedDerivative(usize),

    #[error("matrix not positive definite: pivot {pivot:.3e} at index {index}")]
    NotSpd { index: usize, pivot: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("power iteration did not converge in {iterations} iterations (last estimate {last:.6e})")]
    NoConvergence { iterations: usize, last: f64 },

    #[error("time step unstable: energy grew beyond 10x baseline at step {step}; reduce dt_f below {suggested:.3e}")]
    CflInstability { step: usize, suggested: f64 },

    #[error("config parse error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("unknown preset '{0}'")]
    UnknownPreset(String),

    #[error("degenerate mesh ladder: need at least {needed} meshes, got {got}")]
    DegenerateLadder { needed: usize, got: usize },

    #[error("sample parameter theta = {0} outside [0, 1]")]
    ThetaOutOfRange(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{context}: {source}")]
    WithMeshContext {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Attach mesh context (which ladder entry failed) to a lower-level error.
    pub fn with_mesh(self, nx: usize, nt: usize) -> Error {
        Error::WithMeshContext {
            context: format!("mesh {}x{}", nx, nt),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
