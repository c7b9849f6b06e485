use thiserror::Error;

use crate::types::ParamField;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),

    #[error("model `{model}` requires parameter `{field}`, which is not set")]
    MissingParam { model: &'static str, field: ParamField },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: String, reason: String },

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("dispersive approximation undefined: detuning ω0 − ωb is zero")]
    ZeroDetuning,

    #[error("inconsistent features: {0}")]
    InconsistentFeatures(String),

    #[error("dip at {dip:.6e} is off the phonon ladder (residual {residual:.3} rungs)")]
    OffLadder { dip: f64, residual: f64 },

    #[error("ambiguous classification: {0}")]
    Ambiguous(String),

    #[error(
        "state {state} leaks through the grid boundary (edge/max = {ratio:.3e}); widen the flux window"
    )]
    BoundaryLeakage { state: usize, ratio: f64 },

    #[error("eigensolver not converged: doubling the grid shifts E0 by {relative_shift:.3e} (relative)")]
    NotConverged { relative_shift: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("unsupported schema version `{found}` (expected major {expected})")]
    Schema { found: String, expected: u32 },

    #[error("I/O error on `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse error category, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Io,
    Numerical,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidGrid(_)
            | Error::MissingParam { .. }
            | Error::InvalidParam { .. }
            | Error::Parse(_)
            | Error::Schema { .. } => ErrorKind::Config,
            Error::Io { .. } => ErrorKind::Io,
            Error::NonFinite(_)
            | Error::ZeroDetuning
            | Error::InconsistentFeatures(_)
            | Error::OffLadder { .. }
            | Error::Ambiguous(_)
            | Error::BoundaryLeakage { .. }
            | Error::NotConverged { .. }
            | Error::Numerical(_) => ErrorKind::Numerical,
        }
    }

    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
