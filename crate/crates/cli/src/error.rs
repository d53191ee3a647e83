use thiserror::Error;

/// Failure classes of the runner; each maps to one process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("not converged: {0}")]
    NonConvergence(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::NonConvergence(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Solver errors surface as configuration problems: every precondition the
/// numerics check is something the scenario controls.
impl From<qmaction::Error> for CliError {
    fn from(e: qmaction::Error) -> Self {
        CliError::Config(e.to_string())
    }
}
