use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Non-finite input or an output that left the physical domain.
    #[error("numeric domain error: {0}")]
    NumericDomain(String),

    /// A precondition on an operator (hermiticity, POVM completeness, ...) failed.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Prior and retrodictive weights have disjoint support; the smoothed
    /// probability is undefined.
    #[error("degenerate retrodiction: normalization is zero")]
    DegenerateRetrodiction,

    #[error("ill-conditioned readout correction: {0}")]
    IllConditioned(String),

    #[error("post-selection bin [{lo}, {hi}] is empty")]
    EmptyBin { lo: f64, hi: f64 },

    /// The explicit backward step left the PSD cone; retry with `suggested_dt`.
    #[error("backward step with dt = {dt:e} produced a non-PSD effect matrix; try dt <= {suggested_dt:e}")]
    StepSize { dt: f64, suggested_dt: f64 },
}
