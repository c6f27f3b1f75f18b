use thiserror::Error;

/// Errors raised by the model, sampling and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("system size n = {n} is below the minimum {min}")]
    SystemTooSmall { n: usize, min: usize },

    #[error("point (m = {m}, rho = {rho}) is not in the interior |m| < rho")]
    NotInterior { m: f64, rho: f64 },

    #[error("point (m = {m}, rho = {rho}) is not admissible (need rho > 0, |m| <= rho)")]
    InvalidPoint { m: f64, rho: f64 },

    #[error("field parameters (beta = {beta}, mu = {mu}) violate mu > |beta|")]
    InvalidFields { beta: f64, mu: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("observable arity {arity} exceeds the available {limit}")]
    ArityTooLarge { arity: usize, limit: usize },

    #[error("index set size {size} must satisfy 1 <= |I| < n - 2 = {limit}")]
    IndexSetTooLarge { size: usize, limit: usize },

    #[error("global maximum of psi is attained at the boundary m = {m}")]
    BoundaryMaximum { m: f64 },

    #[error("interaction produced a non-finite value at m = {m}")]
    NonFinite { m: f64 },

    #[error("maximizer at m = {m} is not of type <= {k_max}")]
    TypeTooHigh { m: f64, k_max: usize },

    #[error("integration window around m* = {m_star} contains another maximizer")]
    WindowNotIsolated { m_star: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("optimizer left its domain: {0}")]
    NonConvergence(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable name of the variant, used in machine-readable error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::SystemTooSmall { .. } => "SystemTooSmall",
            Error::NotInterior { .. } => "NotInterior",
            Error::InvalidPoint { .. } => "InvalidPoint",
            Error::InvalidFields { .. } => "InvalidFields",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::ArityTooLarge { .. } => "ArityTooLarge",
            Error::IndexSetTooLarge { .. } => "IndexSetTooLarge",
            Error::BoundaryMaximum { .. } => "BoundaryMaximum",
            Error::NonFinite { .. } => "NonFinite",
            Error::TypeTooHigh { .. } => "TypeTooHigh",
            Error::WindowNotIsolated { .. } => "WindowNotIsolated",
            Error::Quadrature(_) => "Quadrature",
            Error::NonConvergence(_) => "NonConvergence",
            Error::Parse { .. } => "Parse",
            Error::Domain(_) => "Domain",
        }
    }
}
