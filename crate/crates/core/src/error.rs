use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid ring: {0}")]
    InvalidRing(String),
    #[error("degenerate shape `{name}`: even-odd area {area} is not positive")]
    DegenerateShape { name: String, area: f64 },
    #[error("geometry robustness failure: {0}")]
    GeometryRobustness(String),
    #[error("empty bounding box")]
    EmptyBoundingBox,
    #[error("minimization failed after {evaluations} evaluations: {reason}")]
    Minimization {
        reason: String,
        best_x: Vec<f64>,
        best_f: f64,
        evaluations: usize,
    },
    #[error("scoring `{fixed}` against `{mobile}` failed: {source}")]
    Pair {
        fixed: String,
        mobile: String,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid cluster assignment: {0}")]
    InvalidAssignment(String),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error in {location}: {message}")]
    Parse { location: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
