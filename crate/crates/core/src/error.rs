use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid alpha {0}: must lie in (0, 2]")]
    InvalidAlpha(f64),

    #[error("horizon too small: log(T1*T2) = {log_area} must exceed r = {r}")]
    HorizonTooSmall { log_area: f64, r: f64 },

    #[error("grid rule does not settle on a regime over the probe horizons (D = {probes:?})")]
    OscillatingLimit { probes: Vec<f64> },

    #[error(
        "circulant embedding is not positive semi-definite: min eigenvalue {min_eigenvalue:e} \
         (relative {relative:e}), embedding sizes tried {sizes_tried:?}"
    )]
    EmbeddingNotPsd {
        min_eigenvalue: f64,
        relative: f64,
        sizes_tried: Vec<(usize, usize)>,
    },

    #[error("work {work} exceeds the configured cap {cap}")]
    BudgetExceeded { work: u128, cap: u128 },

    #[error("Gauss-Hermite quadrature did not converge with {nodes} nodes (last change {delta:e})")]
    QuadratureNotConverged { nodes: usize, delta: f64 },

    #[error("inconsistent Pickands constants: bracket {bracket} is negative")]
    InvalidConstants { bracket: f64 },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("grid spacing conflicts with the declared regime: {0}")]
    RegimeMismatch(String),

    #[error("empty sample")]
    EmptySample,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
