use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("partitioning vector must hold at least two strictly descending exponents, got {0:?}")]
    InvalidPartitioning(Vec<i32>),
    #[error("component gap of {gap} bits exceeds the 63-bit integer substrate")]
    GapTooWide { gap: i32 },
    #[error("element {value} does not satisfy |x| < 2^{top}")]
    ElementTooLarge { value: f64, top: i32 },
    #[error("component index {index} out of range 1..={depth}")]
    IndexOutOfRange { index: usize, depth: usize },
    #[error("partitioning depths differ: {left} vs {right}")]
    MismatchedDepth { left: usize, right: usize },
    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },
    #[error("all {0} resolution upgrades already applied")]
    AlreadyComplete(usize),
    #[error("scaled accumulator would need {bits} bits")]
    AccumulatorOverflow { bits: u32 },
    #[error("invalid piecewise-linear function: {0}")]
    InvalidActivation(String),
    #[error("malformed weight file at line {line}: {msg}")]
    Format { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
