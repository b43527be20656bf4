use thiserror::Error;

use crate::solver::IterationTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The hybrid rate `delta` is not below one, so no geometric rate is available.
    #[error("rate not certified: delta = {delta} >= 1")]
    RateNotCertified { delta: f64 },

    #[error("infeasible sampling region: no feasible point after {attempts} attempts")]
    InfeasibleSampling { attempts: usize },

    /// A Picard iterate left the finite reals. Carries the orbit up to and
    /// including the offending point.
    #[error("iteration diverged at step {}", .trace.n_iters)]
    Divergence { trace: Box<IterationTrace> },

    #[error("integral equation iteration diverged at iteration {iteration}")]
    FieldDivergence { iteration: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
