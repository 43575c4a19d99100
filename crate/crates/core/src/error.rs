use thiserror::Error;

use crate::construct::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vertex identifiers must be positive integers, got {0}")]
    InvalidVertex(u32),
    #[error("vertex {0} listed more than once")]
    DuplicateVertex(u32),
    #[error("edge ({0}, {0}) is a loop")]
    SelfLoop(u32),
    #[error("edge ({0}, {1}) listed more than once")]
    MultipleEdge(u32, u32),
    #[error("edge ({0}, {1}) references a vertex that is not in the vertex list")]
    UnknownVertex(u32, u32),

    #[error("component {component}: alphabet is empty")]
    EmptyAlphabet { component: usize },
    #[error("component {component}: symbol {symbol:?} appears twice in the alphabet")]
    DuplicateSymbol { component: usize, symbol: String },
    #[error("expected {expected} per-component alphabets, got {found}")]
    AlphabetCount { expected: usize, found: usize },

    #[error("configuration space needs {required} cells, over the cap of {cap}")]
    CapExceeded { required: u128, cap: usize },

    #[error("expected {expected} component measures, got {found}")]
    MeasureCount { expected: usize, found: usize },
    #[error(
        "component {component}: measure has {found} weights, configuration space has {expected}"
    )]
    MeasureLength {
        component: usize,
        expected: usize,
        found: usize,
    },
    #[error("component {component}: weight {weight} of configuration {configuration} is not strictly positive")]
    NonPositiveWeight {
        component: usize,
        configuration: String,
        weight: f64,
    },
    #[error("component {component}: weights sum to {sum}, not 1")]
    WeightSum { component: usize, sum: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid simplex point: {0}")]
    InvalidPoint(String),
    #[error("invalid heredity tensor:\n{0}")]
    InvalidTensor(ValidationReport),
    #[error("invalid skew matrix: {0}")]
    InvalidSkew(String),
    #[error(
        "operator is not Volterra: p[{}][{}][{}] = {value:e} with k outside {{i, j}}",
        .i + 1,
        .j + 1,
        .k + 1
    )]
    NotVolterra {
        i: usize,
        j: usize,
        k: usize,
        value: f64,
    },
    #[error("numerical integrity lost at step {step}: {detail}")]
    NumericalIntegrity { step: usize, detail: String },

    #[error("trajectory has {found} steps, classification needs at least {required}")]
    TooShort { required: usize, found: usize },

    #[error("tournament undefined, tied coefficient pairs: {pairs:?}")]
    DegenerateCoefficients { pairs: Vec<(usize, usize)> },
    #[error("coordinate {coordinate}: {found} usable tail samples, need {required}")]
    InsufficientData {
        coordinate: usize,
        required: usize,
        found: usize,
    },
    #[error("coordinate {coordinate} is already zero")]
    CoordinateZero { coordinate: usize },

    #[error("component index {index} out of range (model has {count} components)")]
    NoSuchComponent { index: usize, count: usize },
    #[error("inconsistent marginals: {0}")]
    InconsistentMarginals(String),
}
