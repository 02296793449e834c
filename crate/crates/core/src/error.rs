use alloc::string::String;

/// Errors raised by the core numerics.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unsupported dimension {0}: grids must have d = 1 or d = 2")]
    UnsupportedDimension(usize),
    #[error("cells per dimension must be a power of two and at least 8, got {0}")]
    InvalidResolution(usize),
    #[error("operands live on different grids")]
    GridMismatch,
    #[error("field has {got} values, grid expects {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("field contains a non-finite value at index {0}")]
    NonFinite(usize),
    #[error("density has grid mean {mean}, expected unit mass")]
    NonUnitMass { mean: f64 },
    #[error("nonlinear Poisson solve did not converge after {iters} iterations (residual {residual:e})")]
    NoConvergence { iters: usize, residual: f64 },
    #[error("mollifier width {r} must lie in (0, 1/4]")]
    InvalidWidth { r: f64 },
    #[error("mollifier width {r} is below two grid spacings ({spacing})")]
    UnresolvableWidth { r: f64, spacing: f64 },
    #[error("unknown initial data kind `{0}`")]
    UnknownKind(String),
    #[error("ensemble of {n} particles exceeds the exact assignment limit of {max}")]
    TooLarge { n: usize, max: usize },
    #[error("densities carry different mass ({first} vs {second})")]
    MassMismatch { first: f64, second: f64 },
    #[error("ensembles are not congruent: {0}")]
    EnsembleMismatch(String),
    #[error("time step {dt} exceeds the stability bound {limit}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = core::result::Result<T, Error>;
