use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |h - h^dagger| = {max_deviation:e})")]
    NotHermitian { max_deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue = {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("bad basis label {0:?}: only '0' and '1' are allowed")]
    BadLabel(String),

    #[error("missing Pauli expectation for label {0}")]
    MissingLabel(String),

    #[error("invalid eigenbasis: {0}")]
    InvalidBasis(String),

    #[error("degenerate spectrum: eigenvalues {0:?} are not distinct")]
    DegenerateSpectrum(Vec<f64>),

    #[error(
        "no pointer configuration in the search space satisfies the orthonormality constraints"
    )]
    NoSolution,

    #[error("states are not orthonormal (max Gram deviation = {max_deviation:e})")]
    NotOrthonormal { max_deviation: f64 },

    #[error("probability {0} is outside [0, 1]")]
    BadProbability(f64),

    #[error("bad observable: {0}")]
    BadObservable(String),

    #[error("correlation is undefined for a null matrix")]
    NullMatrix,

    #[error("invalid projector partition: {0}")]
    InvalidPartition(String),

    #[error("pointer configuration cannot resolve the device: {0}")]
    PointerMismatch(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
