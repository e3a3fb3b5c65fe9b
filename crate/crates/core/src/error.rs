use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Fourier support {modes} exceeds the configured cap {cap}")]
    CapOverflow { modes: usize, cap: usize },
    #[error("frame mismatch: {0}")]
    FrameMismatch(String),
    #[error("wrong degree: expected {expected}, got {got}")]
    Degree { expected: usize, got: usize },
    #[error("matrix size mismatch: {0} vs {1}")]
    MatrixSize(usize, usize),
    #[error("mode {mode:?} is not resolved by grid size {n} on axis {axis}")]
    Nyquist { mode: Vec<i32>, axis: usize, n: usize },
    #[error("positivity failure: {0}")]
    NotPositive(String),
    #[error("closedness violated: residual {0:e}")]
    NotClosed(f64),
    #[error("constraint violated ({what}): residual {residual:e}")]
    Constraint { what: String, residual: f64 },
    #[error("singular system at mode {0:?}")]
    Singular(Vec<i32>),
    #[error("matrix logarithm failure: {0}")]
    MatrixLog(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
