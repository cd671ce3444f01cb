use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("column `{0}` is constant and cannot be standardized")]
    ConstantColumn(String),

    #[error("SCAD shape parameter must exceed 2, got {0}")]
    InvalidScadShape(f64),

    #[error("design is rank deficient: {0}")]
    RankDeficient(String),

    #[error("lambda_max is zero: response carries no signal after centering")]
    DegenerateResponse,

    #[error("solver did not converge at grid index {index} (lambda = {lambda})")]
    NonConvergence { index: usize, lambda: f64 },

    #[error("solver diverged at grid index {index}: {reason}")]
    Divergence { index: usize, reason: String },

    #[error("no admissible lambda: every criterion value is infinite")]
    NoAdmissibleLambda,

    #[error("selector `{0}` is unavailable: {1}")]
    SelectorUnavailable(String, String),

    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Data(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
