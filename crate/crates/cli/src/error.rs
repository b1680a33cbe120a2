//! Command failures and their exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, malformed or inconsistent input.
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] reachtime::Error),

    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 config error, 3 infeasible, 4 divergence, 5 numerical failure,
    /// 1 anything else (such as an unwritable output directory).
    pub fn exit_code(&self) -> i32 {
        use reachtime::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                E::InvalidInput(_) | E::DimensionMismatch(_) | E::AssumptionViolated(_) => 2,
                E::NoCertificate(_) | E::GainNotCertified(_) => 3,
                E::Divergence { .. } => 4,
                E::NumericalFailure(_) | E::Singular => 5,
            },
            CliError::Output { .. } => 1,
        }
    }

    /// Short status word used in diagnostic reports.
    pub fn status(&self) -> &'static str {
        match self.exit_code() {
            2 => "config_error",
            3 => "infeasible",
            4 => "divergence",
            5 => "numerical_failure",
            _ => "error",
        }
    }
}
