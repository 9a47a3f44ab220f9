use std::path::PathBuf;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("argument out of range: {0}")]
    Argument(String),

    #[error("{what} = {value} exceeds the trusted domain cap {cap}")]
    Domain { what: &'static str, value: f64, cap: f64 },

    #[error("supremum not attained within the domain cap: unbounded at r = {r}")]
    Unbounded { r: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("linear program did not converge after {iterations} pivots ({detail})")]
    Solver { iterations: usize, detail: String },

    #[error("norm of the {factor} factor diverges")]
    DivergentNorm { factor: &'static str },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("hypothesis unmet: {0}")]
    HypothesisUnmet(String),

    #[error("malformed input in {path}: {detail}")]
    Parse { path: PathBuf, detail: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, detail: impl Into<String>) -> Self {
        Error::Parse { path: path.into(), detail: detail.into() }
    }
}
