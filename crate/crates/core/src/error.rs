use thiserror::Error;

use crate::dsl::ParseError;

/// Failure raised by a user-supplied scalar function.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{message}")]
pub struct EvalError {
    pub message: String,
}

impl EvalError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid frequency vector: {0}")]
    InvalidFrequency(String),

    #[error("frequency {value} is below the floor r_min = {min}")]
    FrequencyUnderflow { value: f64, min: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("evaluation failed at {point:?}: {source}")]
    Evaluation {
        point: Vec<f64>,
        #[source]
        source: EvalError,
    },

    #[error("non-finite value {value} at {point:?}")]
    NonFinite { point: Vec<f64>, value: f64 },

    #[error("gate returned positive value {value} at {point:?}; gates must map into (-inf, 0]")]
    PositiveGate { point: Vec<f64>, value: f64 },

    #[error("all {} starts failed: {}", .0.len(), format_failures(.0))]
    AllStartsFailed(Vec<(usize, String)>),

    #[error("no starting points supplied")]
    NoStarts,

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("{path}: {source}")]
    Expression {
        path: String,
        #[source]
        source: ParseError,
    },

    #[error("{path}: {message}")]
    Schema { path: String, message: String },

    #[error("grid of {points} points exceeds the limit of {limit}")]
    GridTooLarge { points: f64, limit: f64 },

    #[error("unknown problem {0:?}")]
    UnknownProblem(String),

    #[error("certificate violation for {name}: {detail}")]
    CertificateViolation { name: String, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_failures(failures: &[(usize, String)]) -> String {
    failures
        .iter()
        .map(|(i, msg)| format!("start {i}: {msg}"))
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
