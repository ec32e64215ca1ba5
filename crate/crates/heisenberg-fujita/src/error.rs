use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("poisoned field: {0}")]
    Poisoned(String),
    #[error("budget infeasible: {0}")]
    BudgetInfeasible(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code: 2 for configuration-type errors, 3 for numerical ones.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) | Error::Poisoned(_) => 3,
            Error::Io(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_split_configuration_from_numerical() {
        assert_eq!(Error::Configuration("x".into()).exit_code(), 2);
        assert_eq!(Error::BudgetInfeasible("x".into()).exit_code(), 2);
        assert_eq!(Error::Numerical("x".into()).exit_code(), 3);
        assert_eq!(Error::Poisoned("x".into()).exit_code(), 3);
        assert_eq!(Error::Io(std::io::Error::other("x")).exit_code(), 1);
    }
}
