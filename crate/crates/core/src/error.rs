use thiserror::Error;

/// Errors raised by the expansion, interpolation and quadrature routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid interval [{a}, {b}]: need finite a < b")]
    InvalidInterval { a: f64, b: f64 },

    #[error("unknown catalog function `{0}`")]
    UnknownFunction(String),

    #[error("invalid parameter `{name}` for `{function}`: {reason}")]
    InvalidParameter {
        function: String,
        name: String,
        reason: String,
    },

    #[error("{function}: x = {x} lies outside the domain {domain}")]
    OutsideDomain {
        function: String,
        x: f64,
        domain: String,
    },

    #[error("{function}: derivative of order {order} is not available")]
    OrderUnavailable { function: String, order: u8 },

    #[error("{function}: derivative of order {order} is not finite at x = {x}")]
    NonFinite { function: String, order: u8, x: f64 },

    #[error("missing derivative bound: {0}")]
    MissingBound(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("x = {x} lies outside the interpolation interval [{a}, {b}]")]
    OutsideInterval { x: f64, a: f64, b: f64 },

    #[error("reference integral did not converge within {budget} subdivisions")]
    NoConvergence { budget: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
