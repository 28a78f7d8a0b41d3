use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A quantity left its mathematical domain (e.g. non-positive specific volume).
    #[error("domain error: {0}")]
    Domain(String),

    /// A state violates the hyperbolicity/admissibility conditions.
    #[error("inadmissible state at cell {cell}: {reason}")]
    Inadmissible { cell: usize, reason: String },

    /// A run lost admissibility or produced non-finite values.
    #[error("breakdown at t = {time:.6e} ({stage}): {reason} at cell {cell}")]
    Breakdown {
        time: f64,
        stage: &'static str,
        cell: usize,
        reason: String,
    },

    /// Invalid input to an operation (precondition failure).
    #[error("validation error: {0}")]
    Validation(String),

    /// Configuration file problem, with the offending key path when known.
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    /// Input sequence too short for the requested stencil or reduction.
    #[error("size error: {0}")]
    Size(String),

    /// A condition that should be unreachable for admissible inputs.
    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
