use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Finite-difference step too small (or not positive) relative to the coordinate.
    #[error("degenerate step {step:e} for coordinate {index} (|x| = {magnitude:e})")]
    DegenerateStep {
        index: usize,
        step: f64,
        magnitude: f64,
    },

    #[error("derivative order {0} exceeds the supported maximum of 4")]
    OrderTooHigh(usize),

    #[error("stencil point {point:?} lies outside the field's domain")]
    OutOfDomain { point: Vec<f64> },

    #[error("singular configuration: det g = {det:e} (degeneracy threshold {threshold:e})")]
    SingularConfiguration { det: f64, threshold: f64 },

    #[error("singular input: {0}")]
    SingularInput(String),

    #[error("coordinate transform is singular: {0}")]
    SingularTransform(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid value at `{path}`: {message}")]
    Invariant { path: String, message: String },

    #[error("unknown bus `{0}`")]
    UnknownBus(String),

    #[error("bus `{0}` has no incident lines")]
    IsolatedBus(String),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateStep { .. }
                | Error::OutOfDomain { .. }
                | Error::SingularConfiguration { .. }
        )
    }
}
