//! Error type shared by every module; variants carry enough context to tell a
//! configuration mistake from a numerical failure (the CLI maps them to exit
//! codes 1 and 2 respectively).

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("site index {site} out of range 1..={sites}")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error("unknown Pauli axis label {0:?}")]
    UnknownAxis(String),

    #[error("invalid site set: {0}")]
    InvalidRegion(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("operation requires L = 2 but state has L = {0}")]
    NotTwoQubits(usize),

    #[error("pure-state path requires eta = 1 (got eta = {0})")]
    PureRequiresUnitEfficiency(f64),

    #[error("trace {trace:.6e} outside recoverable window around 1 (integration blow-up)")]
    TraceCollapse { trace: f64 },

    #[error("non-finite value encountered during {context} (step-size failure?)")]
    NonFinite { context: &'static str },

    #[error("readout probability {p:.6e} outside [-1e-12, 1+1e-12]")]
    ProbabilityRange { p: f64 },

    #[error("degenerate Lindblad steady-state space (second null eigenvalue {0:.3e})")]
    DegenerateSteadyState(f64),

    #[error("{failed} of {total} trajectories aborted (threshold 1%): first failure: {first}")]
    TooManyAborts {
        failed: usize,
        total: usize,
        first: String,
    },

    #[error("analysis input invalid: {0}")]
    AnalysisInput(String),

    #[error("verification failed: {failed} of {total} oracle checks")]
    VerificationFailure { failed: usize, total: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// CLI exit code: 1 for configuration/input problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SiteOutOfRange { .. }
            | Error::UnknownAxis(_)
            | Error::InvalidRegion(_)
            | Error::DimensionMismatch(_)
            | Error::InvalidParameter(_)
            | Error::Config(_)
            | Error::NotTwoQubits(_)
            | Error::PureRequiresUnitEfficiency(_)
            | Error::AnalysisInput(_)
            | Error::Io(_) => 1,
            Error::TraceCollapse { .. }
            | Error::NonFinite { .. }
            | Error::ProbabilityRange { .. }
            | Error::DegenerateSteadyState(_)
            | Error::TooManyAborts { .. }
            | Error::VerificationFailure { .. } => 2,
        }
    }
}
