use thiserror::Error;

use crate::semigroup::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("malformed table: {0}")]
    MalformedTable(String),

    #[error("table violates the semigroup laws: {0}")]
    InvalidSemigroup(Violation),

    #[error("operator is not positive")]
    NotPositive,

    #[error("kernel is not positive semidefinite (component {component}, eigenvalue {eigenvalue:e})")]
    NotPsd { component: usize, eigenvalue: f64 },

    #[error("kernel is not 2-positive on points ({x}, {y})")]
    NotTwoPositive { x: usize, y: usize },

    #[error("kernel is not invariant{}: residual {residual:e}", triple_suffix(.triple))]
    NonInvariantKernel {
        triple: Option<(usize, usize, usize)>,
        residual: f64,
    },

    #[error("action of element {xi} is not defined on every point")]
    PartialAction { xi: usize },

    #[error("representation data conflicts with the action on the orbit of point {point}")]
    InconsistentOrbit { point: usize },

    #[error("point {point} is not reached from any seed")]
    UncoveredPoint { point: usize },

    #[error("not a *-representation at ({xi}, {eta}): residual {residual:e}")]
    NotRepresentation { xi: usize, eta: usize, residual: f64 },

    #[error("linearisations are not unitarily equivalent: {0}")]
    NotEquivalent(String),

    #[error("map is not completely positive (component pair ({domain}, {codomain}))")]
    NotCompletelyPositive { domain: usize, codomain: usize },

    #[error("malformed approximate unit: {0}")]
    MalformedNet(String),

    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("task {task} skipped: prerequisite {prerequisite} did not pass")]
    TaskDependency { task: String, prerequisite: String },

    #[error("schema version mismatch: expected {expected}, found {found}")]
    VersionMismatch { expected: u32, found: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn triple_suffix(t: &Option<(usize, usize, usize)>) -> String {
    match t {
        Some((xi, x, y)) => format!(" at (xi={xi}, x={x}, y={y})"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }

    /// Stable machine name used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::MalformedTable(_) => "MalformedTable",
            Error::InvalidSemigroup(_) => "InvalidSemigroup",
            Error::NotPositive => "NotPositive",
            Error::NotPsd { .. } => "NotPSD",
            Error::NotTwoPositive { .. } => "NotTwoPositive",
            Error::NonInvariantKernel { .. } => "NonInvariantKernel",
            Error::PartialAction { .. } => "PartialAction",
            Error::InconsistentOrbit { .. } => "InconsistentOrbit",
            Error::UncoveredPoint { .. } => "UncoveredPoint",
            Error::NotRepresentation { .. } => "NotRepresentation",
            Error::NotEquivalent(_) => "NotEquivalent",
            Error::NotCompletelyPositive { .. } => "NotCP",
            Error::MalformedNet(_) => "MalformedNet",
            Error::Parse { .. } => "ParseError",
            Error::Dimension(_) => "DimensionError",
            Error::TaskDependency { .. } => "TaskDependencyError",
            Error::VersionMismatch { .. } => "VersionMismatch",
            Error::Io(_) => "IOError",
        }
    }
}
