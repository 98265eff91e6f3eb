use thiserror::Error;

/// Errors reported by the estimation, information and bound layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed input: non-finite values, dimension mismatches, empty lists.
    #[error("invalid input: {0}")]
    Input(String),

    /// A score is unbounded at the requested point (prior score on the boundary).
    #[error("divergence: {0}")]
    Divergence(String),

    /// Score of a message that has zero probability under the model.
    #[error("undefined score: message {message} has zero likelihood")]
    UndefinedScore { message: u32 },

    /// The requested operation needs structure the model does not have.
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error(
        "quadrature did not converge on [{lower}, {upper}]: value {value:e}, \
         error estimate {error_estimate:e} after {subdivisions} subdivisions"
    )]
    Quadrature { lower: f64, upper: f64, value: f64, error_estimate: f64, subdivisions: usize },

    /// Any other numeric failure (non-positive denominators, non-finite results).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Monte Carlo run aborted after too many failed trials.
    #[error("simulation aborted after {failures} failed trials; last error: {last}")]
    TooManyFailures { failures: usize, last: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn input(msg: impl Into<String>) -> Error {
    Error::Input(msg.into())
}
