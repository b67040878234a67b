use lienard_core::classify::{BalanceError, ClassifyError, VerifyError};
use lienard_core::model::ValidationReport;
use lienard_core::relation::RelationError;

/// Failure of a command, grouped by exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("assumptions violated: {0}")]
    Assumption(String),
    #[error("numerical failure in {module}: {message}")]
    Numerical { module: &'static str, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Assumption(_) => 2,
            CliError::Numerical { .. } => 3,
        }
    }

    pub fn numerical(module: &'static str, e: impl std::fmt::Display) -> Self {
        CliError::Numerical { module, message: e.to_string() }
    }
}

impl From<ValidationReport> for CliError {
    fn from(r: ValidationReport) -> Self {
        CliError::Assumption(r.summary())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<RelationError> for CliError {
    fn from(e: RelationError) -> Self {
        CliError::numerical("relation", e)
    }
}

impl From<ClassifyError> for CliError {
    fn from(e: ClassifyError) -> Self {
        CliError::numerical("classify", e)
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Fractal(f) => CliError::numerical("fractal", f),
            VerifyError::Orbit(o) => CliError::numerical("relation", o),
            other => CliError::numerical("classify", other),
        }
    }
}

impl From<BalanceError> for CliError {
    fn from(e: BalanceError) -> Self {
        match e {
            BalanceError::AssumptionBrokenByTuning { .. } | BalanceError::ProfileChanged | BalanceError::NotAbove => {
                CliError::Assumption(e.to_string())
            }
            BalanceError::NoSuchCoefficient(_) => CliError::Input(e.to_string()),
            other => CliError::numerical("classify", other),
        }
    }
}
