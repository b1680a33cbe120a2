use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is singular")]
    Singular,

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    /// The synthesis program has no strictly feasible point.
    #[error("no certificate: {0}")]
    NoCertificate(String),

    /// The fixed gain could not be certified by the analysis program.
    #[error("gain not certified: {0}")]
    GainNotCertified(String),

    #[error("simulation diverged at t = {time}: |sigma| = {norm}")]
    Divergence { time: f64, norm: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
