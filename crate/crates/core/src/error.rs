use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{function}: argument {arg} outside the domain")]
    Domain { function: &'static str, arg: f64 },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: &'static str },

    #[error("{operation} is not available for {law} laws")]
    UnsupportedLaw { operation: &'static str, law: &'static str },

    #[error("precondition violated: {0}")]
    Precondition(&'static str),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(&'static str),

    #[error("gamma-sum series did not converge after {terms} terms (remaining mass {remainder:e})")]
    SeriesTruncation { terms: usize, remainder: f64 },

    #[error("grid too coarse: discretization error bound {error_bound:e} exceeds {limit:e}")]
    GridTooCoarse { error_bound: f64, limit: f64 },

    #[error("{what} is not symmetric positive definite")]
    NotPositiveDefinite { what: &'static str },

    #[error("mu - r_f * 1 is zero, so the excess-return constant C vanishes")]
    ZeroExcessReturn,

    #[error("minimizer of Q is attracted to the boundary -theta_hat = {boundary} (q = {q}); the solution is irregular")]
    BoundaryAttraction { q: f64, boundary: f64 },

    #[error("perturbed model at step {step} is invalid: {reason}")]
    InvalidStep { step: usize, reason: String },

    #[error("the true model has an irregular optimal portfolio; robustness is undefined")]
    IrregularTrueModel,
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: &'static str) -> Self {
        Error::InvalidParameter { field: field.into(), reason }
    }
}
