use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the documented domain of an operation.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A frequency computation left the signed 64-bit range.
    #[error("frequency overflow: {0}")]
    FrequencyOverflow(String),

    #[error(
        "quadrature did not converge after {doublings} doublings (grid {grid}): \
         last estimate {last}, previous {previous}"
    )]
    NonConvergence {
        doublings: u32,
        grid: u64,
        last: f64,
        previous: f64,
    },

    /// A precondition that makes an identity valid does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("enumeration budget exceeded: {needed} evaluations requested, budget {budget}; {advice}")]
    BudgetExceeded {
        needed: u128,
        budget: u64,
        advice: &'static str,
    },

    #[error(
        "step envelopes at D = {cells} reach cell width {achieved:.6} > delta = {delta}; \
         D >= {min_cells} is guaranteed to suffice"
    )]
    EnvelopeTooCoarse {
        cells: usize,
        delta: f64,
        achieved: f64,
        min_cells: u64,
    },

    /// Two routes that must agree exactly did not.
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}

impl Error {
    /// True for errors caused by the caller's input rather than by numerics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_) | Error::Precondition(_) | Error::BudgetExceeded { .. }
        )
    }
}
