use thiserror::Error;

use crate::inequality::FormId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the toolkit.
///
/// Variants are grouped by [`ErrorKind`], which front-ends use to pick an
/// exit status.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid index range {lo}..={hi} for a sequence of length {len}")]
    InvalidRange { lo: usize, hi: usize, len: usize },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("bad exponent: {0}")]
    BadExponent(String),

    #[error("sequence not admissible: {0}")]
    SequenceNotAdmissible(String),

    #[error("profile incomplete: {0}")]
    ProfileIncomplete(String),

    #[error("{0} needs the quasi-geometric constant Kgeo of {{2^mu lambda_(2^mu)}}")]
    MissingKgeo(FormId),

    #[error("bad geometric constant: {0}")]
    BadK(String),

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    #[error("no admissible step sequence: every ray has a vanishing right-hand side")]
    NoAdmissibleRay,

    #[error("search space too large: {size} sequences (limit {limit})")]
    TooLarge { size: u128, limit: u128 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

/// Coarse classification used for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// The request is well formed but violates a mathematical precondition.
    Precondition,
    /// No finite value exists (division by zero, no admissible ray).
    Arithmetic,
    /// The request itself is malformed.
    Input,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidRange { .. }
            | Error::PreconditionViolated(_)
            | Error::BadExponent(_)
            | Error::SequenceNotAdmissible(_)
            | Error::ProfileIncomplete(_)
            | Error::MissingKgeo(_)
            | Error::BadK(_)
            | Error::TooLarge { .. } => ErrorKind::Precondition,
            Error::DivisionByZero(_) | Error::NoAdmissibleRay => ErrorKind::Arithmetic,
            Error::InvalidArgument(_) | Error::Parse(_) => ErrorKind::Input,
        }
    }
}
