use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(
        "quadrature did not reach relative tolerance {tolerance:e} within {subdivisions} \
         subdivisions (estimate {estimate}, error estimate {error_estimate:e})"
    )]
    Quadrature {
        tolerance: f64,
        subdivisions: usize,
        estimate: f64,
        error_estimate: f64,
    },

    #[error(
        "fixed-point iteration did not converge after {iterations} iterations \
         (last iterate {last_iterate}, residual {residual:e})"
    )]
    NonConvergence {
        iterations: usize,
        last_iterate: f64,
        residual: f64,
    },

    /// An artifact file does not match its documented layout.
    #[error("schema violation: {0}")]
    Schema(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Numerical failures map to their own CLI exit code.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. } | Error::NonConvergence { .. }
        )
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
