use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },

    #[error("index error: {0}")]
    Index(String),

    #[error("length error: {0}")]
    Length(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("identification error: {0}")]
    Identification(String),

    #[error("optimizer failed to converge: {msg} (best log-likelihood {best_loglik})")]
    Convergence {
        msg: String,
        best_params: Vec<f64>,
        best_loglik: f64,
    },

    #[error("stability error: {0}")]
    Stability(String),

    #[error("bootstrap error: {0}")]
    Bootstrap(String),

    #[error("outlier error: {0}")]
    Outlier(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse {
            row: 0,
            col: 0,
            msg: msg.into(),
        }
    }

    /// Short machine-friendly tag, used in run reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "ParseError",
            Error::Index(_) => "IndexError",
            Error::Length(_) => "LengthError",
            Error::Degenerate(_) => "DegenerateError",
            Error::Domain(_) => "DomainError",
            Error::Config(_) => "ConfigError",
            Error::Singular(_) => "SingularError",
            Error::Identification(_) => "IdentificationError",
            Error::Convergence { .. } => "ConvergenceError",
            Error::Stability(_) => "StabilityError",
            Error::Bootstrap(_) => "BootstrapError",
            Error::Outlier(_) => "OutlierError",
            Error::Io(_) => "IoError",
            Error::Json(_) => "JsonError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
