use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("exponent p = {0} is outside the admissible range")]
    InvalidExponent(f64),

    #[error("invalid interval: {0}")]
    InvalidInterval(String),

    #[error("malformed step function: {0}")]
    MalformedPieces(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid Haar index: {0}")]
    InvalidHaarIndex(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("unbounded sequence required: {0}")]
    BoundedSequence(String),

    #[error("translation sequence exhausted after {available} values ({needed} indices requested)")]
    SequenceExhausted { needed: usize, available: usize },

    #[error("degenerate construction: {0}")]
    Degenerate(String),

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("input is not in the span of the truncated system (reconstruction residual {residual:e})")]
    NotInSpan { residual: f64 },

    #[error("Neumann series did not converge in {iterations} iterations (last residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
