use thiserror::Error;

/// Errors raised by the planning, estimation and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain: {expected}")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The estimate sits at 0 or 1, where the logit is undefined.
    #[error("degenerate estimate {0}: the logit interval is undefined at 0 and 1")]
    DegenerateEstimate(f64),

    #[error("endpoint {index} has zero variance; its correlation is undefined")]
    DegenerateVariance { index: usize },

    #[error(
        "infeasible design: planned global WinP theta = {theta} does not exceed the lower bound theta0 = {lower_bound}"
    )]
    Infeasible { theta: f64, lower_bound: f64 },

    #[error("correlation {rho} is not positive definite for {endpoints} exchangeable endpoints")]
    NotPositiveDefinite { rho: f64, endpoints: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Error {
    Error::Domain {
        name,
        value,
        expected,
    }
}
