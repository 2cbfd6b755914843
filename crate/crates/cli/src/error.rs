use std::fmt;

/// Failures surfaced to the command line, each mapped to an exit code.
#[derive(Debug)]
pub enum CliError {
    /// Malformed scenario, bad flag value or missing input.
    Scenario(String),
    Io(String),
    Core(casimir_core::Error),
}

impl CliError {
    pub fn scenario(msg: impl Into<String>) -> Self {
        CliError::Scenario(msg.into())
    }

    /// 0 success, 2 validation or I/O, 3 numerical non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Scenario(_) | CliError::Io(_) => 2,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Scenario(msg) => write!(f, "{msg}"),
            CliError::Io(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<casimir_core::Error> for CliError {
    fn from(e: casimir_core::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::scenario("x").exit_code(), 2);
        assert_eq!(CliError::Io("x".into()).exit_code(), 2);
        assert_eq!(CliError::Core(casimir_core::Error::NoResonances).exit_code(), 3);
        let bad = casimir_core::Error::Unsupported("x".into());
        assert_eq!(CliError::Core(bad).exit_code(), 2);
    }
}
