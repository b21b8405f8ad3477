use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("probability {0} is outside the open interval (0, 1)")]
    InvalidProbability(f64),

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("misplacement matrix row {index} sums to {sum}")]
    RowSum { index: usize, sum: f64 },

    #[error("misplacement matrix column {index} sums to {sum}")]
    ColumnSum { index: usize, sum: f64 },

    #[error("misplacement matrix entry ({row}, {col}) = {value} is not a probability")]
    BadEntry { row: usize, col: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("quadrature did not converge: best estimate {estimate}, error bound {error_bound}")]
    NonConvergence { estimate: f64, error_bound: f64 },

    #[error("non-finite value in {context} at {at}")]
    NonFinite { context: String, at: f64 },

    #[error("replicate {index} produced a non-finite value")]
    NonFiniteReplicate { index: u64 },

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("singular matrix: determinant {0}")]
    Singular(f64),

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::NonFinite { .. }
                | Error::NonFiniteReplicate { .. }
                | Error::Divergent(_)
        )
    }

    pub(crate) fn parse(position: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            position,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
