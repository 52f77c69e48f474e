use thiserror::Error;

/// Errors raised by the library.
///
/// Variants fall into two families: malformed input (`Parse`, `DimensionMismatch`, ...)
/// and violated operation preconditions (`Precondition`, `OutsideSpace`, ...). The CLI maps
/// the first family to exit code 2 and the second to exit code 3.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("point {0} is not a vertex of the grid")]
    NotOnLattice(String),

    #[error("value {0} lies outside [0, 1]")]
    OutsideUnitInterval(String),

    #[error("point {point} lies outside the space {space}")]
    OutsideSpace { point: String, space: String },

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("p must lie in (0, 1], got {0}")]
    InvalidExponent(f64),

    #[error("support of {size} points exceeds the cap of {cap}")]
    CapExceeded { size: usize, cap: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid basis index: {0}")]
    InvalidIndex(String),

    #[error("molecule is not in the requested block: {0}")]
    NotInBlock(String),

    #[error("internal invariant broken: {0}")]
    Internal(String),
}

impl Error {
    /// True for errors caused by malformed input rather than a violated precondition.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Parse(_) | Error::DimensionMismatch { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
