use thiserror::Error;

pub type Result<T, E = GmeError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GmeError {
    #[error("no factors")]
    NoFactors,

    #[error("improper bipartition: {0}")]
    ImproperBipartition(String),

    #[error("invalid dimensions: {0}")]
    InvalidDims(String),

    #[error("party index {party} out of range for {parties} parties")]
    PartyOutOfRange { party: usize, parties: usize },

    /// A validation check failed; `check` names it and `value` is what was measured.
    #[error("validation failed: {check} (measured {value:e}, tolerance {tol:e})")]
    Validation { check: &'static str, value: f64, tol: f64 },

    #[error("Kraus operators are not complete: max |sum K^dag K - I| = {0:e}")]
    KrausIncomplete(f64),

    #[error("polygamy violated: Heron radicand {0:e} below tolerance")]
    PolygamyViolated(f64),

    #[error("expected {expected} parties, got {got}")]
    PartyCount { expected: &'static str, got: usize },

    #[error("{what} {value} out of range {lo}..={hi}")]
    OutOfRange { what: &'static str, value: usize, lo: usize, hi: usize },

    #[error("inconsistent factorization: reconstruction deviation {deviation:e} exceeds {tol:e}")]
    InconsistentFactorization { deviation: f64, tol: f64 },

    #[error("every eigenvalue is below the rank tolerance {0:e}")]
    ZeroRank(f64),

    #[error("ensemble size {size} is smaller than the rank {rank}")]
    EnsembleTooSmall { size: usize, rank: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("checksum mismatch: header says {expected}, data hashes to {actual}")]
    Checksum { expected: String, actual: String },
}

impl GmeError {
    /// True for errors that indicate a broken internal invariant rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            GmeError::PolygamyViolated(_) | GmeError::InconsistentFactorization { .. }
        )
    }
}
