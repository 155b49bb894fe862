use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    DimensionMismatch {
        expected: usize,
        actual: usize,
        context: &'static str,
    },

    #[error("time grid mismatch: {0}")]
    GridMismatch(String),

    #[error("atom at t = {time} is not a multiple of dt = {dt}")]
    OffGridAtom { time: f64, dt: f64 },

    #[error("invalid band width eps = {eps} for grid size {grid_size}: {reason}")]
    InvalidEpsilon {
        eps: f64,
        grid_size: usize,
        reason: &'static str,
    },

    #[error("index ({row}, {col}) out of range for a {rows}x{cols} measure")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error(
        "the {which} space is operator-valued (not a coordinate space); \
         no kernel certificate exists, use empirical_gain instead"
    )]
    OperatorValued { which: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
