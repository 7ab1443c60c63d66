use thiserror::Error;

/// Errors raised by key construction, generation and the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} must be a finite number, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("mu must be non-integer in (2,100): {0} is not greater than 2")]
    MuTooSmall(f64),

    #[error("mu must be non-integer in (2,100): {0} is not less than 100")]
    MuTooLarge(f64),

    #[error("mu must be non-integer in (2,100): {0} is an integer")]
    MuInteger(f64),

    #[error("x0 must lie in the open interval (0,1), got {0}")]
    SeedOutOfRange(f64),

    #[error("tent map mu must lie in [0,2], got {0}")]
    TentMuOutOfRange(f64),

    #[error("state must lie in [0,1], got {0}")]
    StateOutOfRange(f64),

    #[error("{what} must be at least {min}, got {got}")]
    CountTooSmall {
        what: &'static str,
        min: usize,
        got: usize,
    },

    #[error("unknown test name `{0}`")]
    UnknownTest(String),

    #[error("{test} needs at least {min} bits, got {got}")]
    StreamTooShort {
        test: &'static str,
        min: usize,
        got: usize,
    },

    #[error("invalid parameter for {test}: {reason}")]
    InvalidTestParameter { test: &'static str, reason: String },

    #[error("sequence lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("sequence has zero variance; correlation is undefined")]
    ZeroVariance,

    #[error("input is empty")]
    EmptyInput,

    #[error("parameter grid is empty or contains no usable values")]
    EmptyGrid,

    #[error("perturbed parameter leaves its valid range: {0}")]
    PerturbationOutOfRange(Box<Error>),

    #[error("every perturbation of {delta:e} is absorbed by binary64 rounding of the base value")]
    DegeneratePerturbation { delta: f64 },

    #[error("precision exponent must be negative, got {0}")]
    InvalidPrecision(i32),
}

pub type Result<T> = std::result::Result<T, Error>;
