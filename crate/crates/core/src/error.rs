use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0}: need n >= {1}")]
    InvalidDimension(usize, usize),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("dimension {0} is even; the sharp zero-mode family exists only in odd dimensions")]
    EvenDimension(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid with {points} points per axis is too small for a stencil of order {order}")]
    Stencil { points: usize, order: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("no admissible base spinor found for n = {n}, s = {sign}")]
    NoAdmissibleSpinor { n: usize, sign: i32 },

    #[error("malformed field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
