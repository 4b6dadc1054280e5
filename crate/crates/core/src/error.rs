use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation has no defined answer for these parameters.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A tail bound cannot be inverted at the requested probability.
    #[error("delta = {delta} is unreachable; attainable bound values lie in [{min_attainable}, {max_attainable}]")]
    Unreachable {
        delta: f64,
        min_attainable: f64,
        max_attainable: f64,
    },

    /// Adaptive quadrature exhausted its refinement budget.
    #[error("quadrature did not converge: estimate {estimate}, error bound {error_bound}")]
    Convergence { estimate: f64, error_bound: f64 },

    /// Malformed sample file or text.
    #[error("{}line {line}: {message}", source_name(.path))]
    Parse {
        path: Option<PathBuf>,
        line: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },

    /// Internal invariant violated (e.g. a bound that should be monotone is not).
    #[error("internal error: {0}")]
    Internal(String),
}

fn source_name(path: &Option<PathBuf>) -> String {
    match path {
        Some(p) => format!("{}: ", p.display()),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
