use thiserror::Error;

use crate::lattice::{Domain, Representation};

#[derive(Debug, Error)]
pub enum Error {
    #[error("expected a {expected:?}-domain field, got {found:?}")]
    DomainMismatch { expected: Domain, found: Domain },
    #[error("fields are sampled on different transverse grids")]
    GridMismatch,
    #[error("statistical representation mismatch: {0:?} vs {1:?}")]
    RepresentationMismatch(Representation, Representation),
    #[error("length mismatch: expected {expected}, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("invalid configuration: {0}")]
    Configuration(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),
    #[error("Fock truncation at {cutoff} too small for <n> = {mean}: tail mass {tail:e}")]
    Truncation { cutoff: usize, mean: f64, tail: f64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
