use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The parking orbit and the operational plane precess at (nearly) the same rate, so the
    /// alignment time of the transfer lead time is unbounded.
    #[error("relative RAAN drift {rate:e} rad per time unit is below the floor {floor:e}")]
    DegenerateDrift { rate: f64, floor: f64 },

    #[error("{quantity} did not converge: relative change {rel_change:e} at quadrature order {order}")]
    NumericalNonConvergence {
        quantity: &'static str,
        rel_change: f64,
        order: usize,
    },

    #[error("fixed point between echelons diverged after {iterations} iterations (residual {residual:e})")]
    FixedPointDivergence { iterations: usize, residual: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no feasible solution found; best total constraint violation {best_violation:e}")]
    NoFeasibleSolution { best_violation: f64 },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
