use thiserror::Error;

/// Errors raised by the region computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GwError {
    /// An argument violates its documented precondition.
    #[error("domain error: {name} = {value} must satisfy {constraint}")]
    Domain {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// A probability vector or matrix is malformed.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// The point lies outside the projection region I0* of the source.
    #[error("point (alpha={alpha}, beta={beta}) lies outside the projection region")]
    OutsideRegion { alpha: f64, beta: f64 },

    /// A construction's parameters do not yield a valid distribution.
    #[error("infeasible construction: {0}")]
    Infeasible(String),

    /// A bracketed root search was started on a non-straddling bracket.
    #[error("no root in bracket [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },

    /// No restart of a multistart search reached the feasibility threshold.
    #[error("optimizer did not converge: best constraint violation {violation:e}")]
    NonConvergence { violation: f64 },
}

pub type Result<T> = std::result::Result<T, GwError>;

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    constraint: &'static str,
) -> Result<()> {
    if value.is_nan() || value < lo || value > hi {
        return Err(GwError::Domain {
            name,
            value,
            constraint,
        });
    }
    Ok(())
}
