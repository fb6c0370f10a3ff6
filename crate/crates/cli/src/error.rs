use std::fmt;

use curriculum_core::Error as CoreError;

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

/// An error with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub source: anyhow::Error,
}

impl CliError {
    pub fn input(err: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_INPUT,
            source: err.into(),
        }
    }

    pub fn numerical(err: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_NUMERICAL,
            source: err.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.source)
    }
}

fn code_of(err: &CoreError) -> u8 {
    match err {
        CoreError::InvalidParameter(_)
        | CoreError::InvalidInput(_)
        | CoreError::Parse { .. }
        | CoreError::Io { .. }
        | CoreError::WarmStartUnsupported => EXIT_INPUT,
        CoreError::DegenerateInput(_)
        | CoreError::Convergence { .. }
        | CoreError::RankDeficient { .. }
        | CoreError::EigenFailure => EXIT_NUMERICAL,
        CoreError::StageFailed { source, .. } => code_of(source),
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        let code = code_of(&err);
        let source = match &err {
            CoreError::RankDeficient { null_dims, dimension } => anyhow::anyhow!(
                "{err}\n{} null dimension(s) out of {dimension}; pass --ridge to regularize",
                null_dims.len()
            ),
            _ => err.into(),
        };
        Self { code, source }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub trait Context<T> {
    fn input_context(self, what: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T, E: Into<anyhow::Error>> Context<T> for Result<T, E> {
    fn input_context(self, what: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|e| CliError::input(e.into().context(what())))
    }
}
