use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("no sign change found in phase field")]
    NoCrossing,

    #[error("phase field has {0} sign changes, expected exactly one")]
    MultipleCrossings(usize),

    #[error("singular linear system at row {row} (step {step}, t = {t})")]
    SingularSystem { row: usize, step: usize, t: f64 },

    #[error("phase field left the bound |c| <= {bound}: max |c| = {value} at step {step}, t = {t}")]
    BoundViolation {
        bound: f64,
        value: f64,
        step: usize,
        t: f64,
    },

    #[error("non-finite value produced at step {step}, t = {t}")]
    NonFinite { step: usize, t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
