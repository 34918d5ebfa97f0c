use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Point in (λ, α, t) space at which a numerical routine failed.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Coordinate {
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    pub t: Option<f64>,
}

impl fmt::Display for Coordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(l) = self.lambda {
            parts.push(format!("lambda={l}"));
        }
        if let Some(a) = self.alpha {
            parts.push(format!("alpha={a}"));
        }
        if let Some(t) = self.t {
            parts.push(format!("t={t}"));
        }
        if parts.is_empty() {
            f.write_str("unknown coordinate")
        } else {
            f.write_str(&parts.join(", "))
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid chain configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid site pair ({i}, {j}) for a chain of {n} spins")]
    InvalidPair { i: usize, j: usize, n: usize },
    #[error("invalid interval: {0}")]
    InvalidInterval(String),
    #[error("full Hilbert space oracle limited to {max} spins, got {n}")]
    SizeLimit { n: usize, max: usize },
    #[error("numerical failure: {message} (at {at})")]
    Numerical { message: String, at: Coordinate },
    #[error("objective has no interior maximum: {0}")]
    NoMaximum(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("monotonicity violated: {0}")]
    NonMonotone(String),
}

impl Error {
    pub(crate) fn numerical(message: impl Into<String>) -> Self {
        Error::Numerical { message: message.into(), at: Coordinate::default() }
    }

    /// Attach a time coordinate to a numerical failure. Other variants pass through.
    pub fn at_time(self, t: f64) -> Self {
        match self {
            Error::Numerical { message, mut at } => {
                at.t.get_or_insert(t);
                Error::Numerical { message, at }
            }
            other => other,
        }
    }

    /// Attach initial-state parameters to a numerical failure.
    pub fn at_params(self, lambda: f64, alpha: f64) -> Self {
        match self {
            Error::Numerical { message, mut at } => {
                at.lambda.get_or_insert(lambda);
                at.alpha.get_or_insert(alpha);
                Error::Numerical { message, at }
            }
            other => other,
        }
    }

    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical { .. })
    }
}
