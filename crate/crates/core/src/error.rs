use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("objects are defined on different measures ({left} vs {right})")]
    MeasureMismatch { left: String, right: String },
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("gamma vanishes at atom {index}")]
    VanishingGamma { index: usize },
    #[error("gamma is not unimodular at atom {index} (|gamma| = {modulus})")]
    NotUnimodular { index: usize, modulus: f64 },
    #[error("rank-two solvability u1*v1 = u2*v2 violated at atom {index} (defect {defect:e})")]
    RankTwoCondition { index: usize, defect: f64 },
    #[error("commutator kernel has nonzero diagonal at atom {index} (|k| = {value:e})")]
    NonzeroDiagonal { index: usize, value: f64 },
    #[error("atoms too close: conditioning {cond:e} exceeds limit")]
    IllConditioned { cond: f64 },
    #[error("operator is not a diagonal unitary")]
    NotDiagonalUnitary,
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("precondition violated: {what} (defect {defect:e})")]
    Precondition { what: String, defect: f64 },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
