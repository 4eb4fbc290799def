use thiserror::Error;

/// Errors produced by the analytics, inversion and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quadrature did not reach its tolerance within the subdivision budget.
    #[error("numerical failure in {what}: achieved error estimate {error_estimate:e}")]
    Quadrature { what: String, error_estimate: f64 },

    /// A series was truncated at its term cap, or its terms kept growing.
    #[error("{what}: series did not converge after {terms} terms (partial sum {partial}, last term {last_term:e})")]
    Series {
        what: String,
        terms: usize,
        partial: f64,
        last_term: f64,
    },

    /// A requested level lies outside what a curve can represent.
    #[error("range error: {0}")]
    Range(String),

    /// Malformed configuration file or command-line grid.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of the numerical machinery, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Quadrature { .. } | Error::Series { .. })
    }
}
