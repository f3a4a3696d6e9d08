use thiserror::Error;

/// Errors raised by the algebraic and numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),
    #[error("state is not faithful: smallest eigenvalue {min_eigenvalue:e} is below {threshold:e}")]
    NotFaithful { min_eigenvalue: f64, threshold: f64 },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("letter is not centered: |phi(a)| = {0:e}")]
    NotCentered(f64),
    #[error("truncation too small: need length {needed}, Fock space has {available}")]
    TruncationTooSmall { needed: usize, available: usize },
    #[error("z is not unimodular: |z| = {0}")]
    NotUnimodular(f64),
    #[error("band index {n} out of range for degree {degree}")]
    DegreeOutOfRange { n: i64, degree: usize },
    #[error("operands live over different algebra families")]
    FamilyMismatch,
    #[error("map is not state preserving: {0}")]
    NotStatePreserving(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("element is not homogeneous of degree {0}")]
    NotHomogeneous(usize),
    #[error("word does not fit in the enumerated ball: needs radius {needed}, capacity {capacity}")]
    CapacityExceeded { needed: usize, capacity: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("no convergence after {iterations} iterations; best bracket [{lower}, {upper}]")]
    NoConvergence { iterations: usize, lower: f64, upper: f64 },
    #[error("bad instance spec: {0}")]
    BadSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
