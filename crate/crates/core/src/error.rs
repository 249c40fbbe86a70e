use thiserror::Error;

/// Errors raised by the numerical and algebraic routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The caller passed a value outside the documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A Weierstrass or theta evaluation landed too close to a lattice point.
    #[error("argument within {distance:e} of a lattice pole")]
    PoleProximity { distance: f64 },

    /// The zero and pole lifts of a divisor differ by something that is not a period.
    #[error("divisor is not principal: zero/pole sums differ by {re:+e}{im:+e}i (not a period)")]
    NonPrincipal { re: f64, im: f64 },

    /// An iterative method (root finding, contour counting, construction self-check)
    /// did not reach its accuracy target.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A recursion or retry budget ran out before the reduction finished.
    #[error("budget exhausted: {0}")]
    Budget(String),

    /// A certificate or JSON document could not be decoded.
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
