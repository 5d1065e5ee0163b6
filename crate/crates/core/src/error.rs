use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("convolution expansion needs {terms} terms, cap is {cap}")]
    ConvolutionTooLarge { terms: u128, cap: u64 },

    #[error("series tail {tail:e} beyond m = {m_max} exceeds tolerance {tolerance:e}")]
    Truncation {
        m_max: usize,
        tail: f64,
        tolerance: f64,
    },

    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("matrix is not numerically positive definite")]
    NotPositiveDefinite,

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("grid is not strictly increasing at position {0}")]
    NonMonotone(usize),

    #[error("no iterates retained after burn-in and thinning")]
    EmptyRetained,

    #[error("series has zero variance")]
    ZeroVariance,

    #[error("iteration {iteration}: {source}")]
    Chain {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("data: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable, machine-parsable category used by the CLI.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "parameter",
            Error::ConvolutionTooLarge { .. }
            | Error::Truncation { .. }
            | Error::Quadrature { .. }
            | Error::NotPositiveDefinite
            | Error::ZeroVariance => "numeric",
            Error::Invariant(_) => "invariant",
            Error::Chain { source, .. } => source.category(),
            Error::NonMonotone(_) | Error::Data(_) | Error::Parse { .. } | Error::Csv(_) => "data",
            Error::EmptyRetained => "diagnostics",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
