use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point:?} lies outside the map domain")]
    PointOutsideDomain { point: Vec<f64> },

    #[error("parse error{}: field `{field}`: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse {
        line: Option<usize>,
        field: String,
        message: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("sampling failed: obtained {obtained} Jacobians, needed at least {required}")]
    SamplingFailed { obtained: usize, required: usize },

    #[error("hull element is singular and cannot be inverted")]
    SingularElement,

    #[error("chart differential is singular (condition number {condition:.3e})")]
    SingularChart { condition: f64 },

    #[error("path leaves the patch domain at {point:?}")]
    PathLeavesDomain { point: Vec<f64> },

    #[error("degenerate path: {0}")]
    DegeneratePath(String),

    #[error("no grid path connects the endpoints at mesh {mesh}")]
    Disconnected { mesh: f64 },

    #[error("radius {radius} exceeds the domain horizon {horizon}")]
    HorizonExceeded { radius: f64, horizon: f64 },

    #[error("radial profile is empty")]
    EmptyProfile,

    #[error("check unavailable: {0}")]
    CheckUnavailable(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            line: None,
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }

    /// True for errors that stem from malformed input documents.
    pub fn is_parse_error(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Validation(_) | Error::Io(_))
    }
}
