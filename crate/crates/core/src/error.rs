use thiserror::Error;

/// Errors raised across the simulator and its diagnostics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported derivative order {order} (maximum is {max})")]
    UnsupportedOrder { order: usize, max: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("admissibility violation: weight is non-positive ({value}) at x = {x}")]
    AdmissibilityViolation { x: f64, value: f64 },
    #[error("ill-posed weight ladder: {0}")]
    IllPosedLadder(String),
    #[error("index {index} out of range for {what}")]
    Index { index: i64, what: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("grid error: {0}")]
    Grid(String),
    #[error("singular matrix: zero pivot in column {column}")]
    SingularMatrix { column: usize },
    #[error("input error: {0}")]
    Input(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solution blew up at t = {t}: max |u| = {max_abs}, L2 = {l2}")]
    BlowUp { t: f64, max_abs: f64, l2: f64 },
    #[error("unsupported boundary case {0}: only cases a and c carry a decay law")]
    UnsupportedCase(char),
    #[error("fit error: {0}")]
    Fit(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
