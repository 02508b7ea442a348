use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Adaptive quadrature ran out of subdivisions before meeting its
    /// tolerance. `estimate` is the best value obtained.
    #[error("quadrature did not converge within the subdivision budget (best estimate {estimate})")]
    Convergence { estimate: f64 },
    /// A correlation configuration or scheme violates a feasibility condition.
    #[error("infeasible configuration: {0}")]
    Infeasible(String),
    /// A constrained search found no point satisfying the constraint.
    /// `best_gap` is the largest constraint value seen.
    #[error("no feasible point found (largest constraint value {best_gap})")]
    NoFeasiblePoint { best_gap: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
