use thiserror::Error;

use crate::conic::SolveStatus;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("{what} is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { what: String, min_eigenvalue: f64 },

    #[error("{what} is not normalized (deviation {deviation:e})")]
    NotNormalized { what: String, deviation: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("size overflow: {count} exceeds the cap {cap}")]
    SizeOverflow { count: u128, cap: u128 },

    #[error("invalid joint observable: {0}")]
    InvalidJoint(String),

    #[error("subchannels are not subnormalized (deficit min eigenvalue {0:e})")]
    NotSubnormalized(f64),

    #[error("unsupported program form: {0}")]
    UnsupportedForm(String),

    #[error("free set {kind} does not apply to {class}")]
    KindMismatch { kind: String, class: String },

    #[error("program is not strictly feasible: {0}")]
    SlaterFailure(String),

    #[error("ensemble is not in the image of the instrument (residual {0:e})")]
    NotInImage(f64),

    #[error("witness vanishes (total trace {0:e})")]
    ZeroWitness(f64),

    #[error("solver finished with status {0:?}")]
    Solver(SolveStatus),

    #[error("{path}: {message}")]
    Format { path: String, message: String },

    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
}
