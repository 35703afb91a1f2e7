use thiserror::Error;

/// Errors surfaced by grid constructions and operators.
///
/// Degenerate inputs are always reported through a typed variant, never by
/// silently returning zero or an empty result.
#[derive(Debug, Error)]
pub enum Error {
    /// Two objects built on different grids were combined.
    #[error("grid mismatch: {context}")]
    GridMismatch { context: String },

    /// Input violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A mask file could not be parsed; `offset` is the byte position.
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    /// A metric parameter is below the grid resolution (radius, width, ...).
    #[error("scale error: {0}")]
    Scale(String),

    /// A requested feature cannot be represented at this grid level.
    #[error("resolution error: {feature} needs at least {needed} cells, has {available}")]
    Resolution {
        feature: String,
        needed: usize,
        available: usize,
    },

    /// A ratio whose denominator vanished (for example zero total variation).
    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    /// Two cells that were asked to be joined lie in different components.
    #[error("unreachable: {0}")]
    Unreachable(String),

    /// An operator postcondition failed; indicates a caller contract break.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
