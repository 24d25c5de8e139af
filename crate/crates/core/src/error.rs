use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph has no edge ends to sample from")]
    EmptyGraph,
    #[error("vertex {vertex} has degree {degree}, cannot draw {requested} distinct slots")]
    InsufficientDegree {
        vertex: u32,
        degree: usize,
        requested: usize,
    },
    #[error("unknown vertex {0}")]
    UnknownVertex(u32),
    #[error("falling-factorial denominator is zero")]
    ZeroDenominator,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("generating-function oracle needs integral a0 and b0, got a0={a0}, b0={b0}")]
    NonIntegralParameters { a0: String, b0: String },
    #[error("exhaustive enumeration exceeds {limit} history branches")]
    StateSpaceTooLarge { limit: u64 },
    #[error("only {found} conditioning events for degree {degree}, need at least {required}")]
    InsufficientSamples {
        degree: u32,
        found: u64,
        required: u64,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("tolerance file: {0}")]
    Tolerances(String),
}

pub type Result<T> = std::result::Result<T, Error>;
