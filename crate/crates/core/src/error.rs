use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not symmetric positive definite: {0}")]
    Factorization(String),

    #[error("min-norm solver did not converge after {iterations} iterations (certificate gap {gap:e})")]
    MinNormNotConverged {
        iterations: usize,
        gap: f64,
        best_weights: Vec<f64>,
    },

    #[error("subderivative sampling failed after {oracle_calls} oracle calls (last t = {last_t:e})")]
    SamplingFailed {
        last_t: f64,
        last_xi: Vec<f64>,
        oracle_calls: usize,
    },

    #[error("obstacle active-set iteration did not settle within {0} iterations")]
    ActiveSetCycle(usize),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
