use num_complex::Complex64;
use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("argument {point} lies within {eps:e} of the pole at {pole}")]
    PoleProximity {
        point: Complex64,
        pole: Complex64,
        eps: f64,
    },

    #[error("factor {factor} of the summand at x_{index} = {point} sits on a pole")]
    TermPole {
        index: usize,
        factor: String,
        point: Complex64,
    },

    #[error("denominator {function} vanishes at {point}")]
    VanishingDenominator { function: String, point: Complex64 },

    #[error("{what} did not converge: {detail}")]
    NonConvergence { what: String, detail: String },

    #[error("parse error at line {line}, column {column}: expected {expected}, found {found}")]
    Parse {
        line: usize,
        column: usize,
        expected: String,
        found: String,
    },

    #[error("semantic error in {context}: {message}")]
    Semantic { context: String, message: String },

    #[error("coefficient is singular: {0}")]
    SingularCoefficient(String),

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("family mismatch: declared {declared}, parity gives {computed}")]
    FamilyMismatch { declared: String, computed: String },

    #[error("contour radius {radius} too large: another pole lies at distance {distance}")]
    RadiusTooLarge { radius: f64, distance: f64 },

    #[error("nome series tail bound unreachable for q = {q}: reduce m")]
    TailBound { q: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
