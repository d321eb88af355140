use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("unphysical state: smallest symplectic eigenvalue {0} < 1")]
    Unphysical(f64),

    #[error("near-pure mode (symplectic eigenvalue {0}); Gibbs matrix diverges")]
    NearPure(f64),

    #[error("singular Gibbs matrix")]
    SingularGibbs,

    #[error("unphysical channel: {0}")]
    UnphysicalChannel(String),

    #[error("unsupported channel: {0}")]
    UnsupportedChannel(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("numeric guard: {0}")]
    NumericGuard(String),

    #[error("optimizer did not converge after {0} evaluations")]
    NonConvergence(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NumericGuard(format!("{name} is not finite ({x})")))
    }
}
