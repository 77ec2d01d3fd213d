//! Crate-wide error type.

use thiserror::Error;

use crate::parser::ParseError;

#[derive(Debug, Error)]
pub enum Error {
    /// Two symbols (or a symbol and a truncation) disagree on the number of modes.
    #[error("mode count mismatch: expected {expected}, found {found}")]
    ModeMismatch { expected: usize, found: usize },

    #[error("mode index {index} out of range for {mode_count} mode(s)")]
    ModeIndex { index: usize, mode_count: usize },

    #[error("total Fock dimension {dim} exceeds the configured limit {limit}")]
    DimensionLimit { dim: usize, limit: usize },

    #[error("operator is not Hermitian (max |A - A^dag| = {deviation:.3e})")]
    NonHermitian { deviation: f64 },

    #[error("density matrix trace {trace:.12} deviates from 1 by more than {tolerance:.1e}")]
    TraceDeviation { trace: f64, tolerance: f64 },

    #[error("density matrix has eigenvalue {eigenvalue:.3e} below the positivity floor")]
    NotPositive { eigenvalue: f64 },

    #[error("s-ordered distributions are only defined for s <= 0; \
             at s = {s} the anti-normal family is singular for the supported states \
             (the Glauber-Sudarshan function of a coherent state is a delta distribution)")]
    UnsupportedOrder { s: String },

    #[error("momentum {k} is not a lattice frequency 2*pi*j/(L*dx) for L = {sites}, dx = {spacing}")]
    IncompatibleMomentum { k: f64, sites: usize, spacing: f64 },

    #[error("omega(k) = 0: a massless k = 0 mode has no canonical (Q, P) pair; use m > 0")]
    ZeroFrequencyMode,

    #[error("field configuration has {found} sample(s), lattice expects {expected}")]
    FieldLength { expected: usize, found: usize },

    #[error("grids are single-mode only; state has {mode_count} modes")]
    MultimodeGrid { mode_count: usize },

    #[error("{context} (line {line}): {message}")]
    Csv {
        context: String,
        line: usize,
        message: String,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// CLI exit code family: 2 for user-input errors, 3 for dimension and
    /// contract errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Csv { .. } | Error::Config(_) | Error::Io(_) => 2,
            Error::ModeMismatch { .. }
            | Error::ModeIndex { .. }
            | Error::DimensionLimit { .. }
            | Error::NonHermitian { .. }
            | Error::TraceDeviation { .. }
            | Error::NotPositive { .. }
            | Error::UnsupportedOrder { .. }
            | Error::IncompatibleMomentum { .. }
            | Error::ZeroFrequencyMode
            | Error::FieldLength { .. }
            | Error::MultimodeGrid { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
