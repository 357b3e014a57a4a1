use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SegError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("point outside the tubular neighborhood: {0}")]
    OutOfTube(String),
    #[error("degenerate tube: 1 + s*kappa = {0} <= 0")]
    DegenerateTube(f64),
    #[error("degenerate sector: width {width} <= 4*sqrt(eps) = {limit}")]
    DegenerateSector { width: f64, limit: f64 },
    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid boundary data: {0}")]
    InvalidBoundaryData(String),
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error("unresolved layer at eps = {eps}: h = {h} > sqrt(eps)/4 = {limit}")]
    Resolution { eps: f64, h: f64, limit: f64 },
    #[error("cannot fit: {0}")]
    CannotFit(String),
    #[error("config error at line {line}, key '{key}': {msg}")]
    Config { line: usize, key: String, msg: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for SegError {
    fn from(e: std::io::Error) -> Self {
        SegError::Io(e.to_string())
    }
}

impl From<csv::Error> for SegError {
    fn from(e: csv::Error) -> Self {
        SegError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, SegError>;
