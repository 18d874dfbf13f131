use std::fmt;
use std::path::Path;

use kcgml_core::Error as CoreError;

/// Process exit classes. Usage errors (2) are reported by clap itself.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ExitKind {
    Internal,
    Config,
    Input,
    StageDependency,
}

impl ExitKind {
    pub fn code(self) -> i32 {
        match self {
            ExitKind::Internal => 1,
            ExitKind::Config => 3,
            ExitKind::Input => 4,
            ExitKind::StageDependency => 5,
        }
    }
}

impl fmt::Display for ExitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExitKind::Internal => "internal error",
            ExitKind::Config => "config error",
            ExitKind::Input => "input error",
            ExitKind::StageDependency => "missing upstream artifact",
        })
    }
}

#[derive(Debug, thiserror::Error)]
#[error("[{stage}] {kind}: {message}")]
pub struct CliError {
    pub kind: ExitKind,
    pub stage: &'static str,
    pub message: String,
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn new(kind: ExitKind, stage: &'static str, message: impl Into<String>) -> Self {
        Self {
            kind,
            stage,
            message: message.into(),
        }
    }

    pub fn config(stage: &'static str, message: impl Into<String>) -> Self {
        Self::new(ExitKind::Config, stage, message)
    }

    pub fn missing(stage: &'static str, path: &Path, producer: &str) -> Self {
        Self::new(
            ExitKind::StageDependency,
            stage,
            format!("{} not found; run `{producer}` first", path.display()),
        )
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.code()
    }
}

/// Tags a core error with the stage it came from and an exit class.
pub fn core(stage: &'static str) -> impl Fn(CoreError) -> CliError {
    move |e| {
        let kind = match &e {
            CoreError::Config(_) => ExitKind::Config,
            CoreError::SelfLoop(_)
            | CoreError::NonPositiveTime
            | CoreError::NodeNotFound(_)
            | CoreError::EmptyInput
            | CoreError::MostlyMalformed { .. }
            | CoreError::VersionMismatch { .. }
            | CoreError::Truncated(_)
            | CoreError::Parse { .. }
            | CoreError::Shape { .. }
            | CoreError::Io(_)
            | CoreError::Json(_) => ExitKind::Input,
            _ => ExitKind::Internal,
        };
        CliError::new(kind, stage, format!("{} ({})", e, e.code()))
    }
}

pub fn io<'a>(stage: &'static str, path: &'a Path) -> impl Fn(std::io::Error) -> CliError + 'a {
    move |e| CliError::new(ExitKind::Input, stage, format!("{}: {e}", path.display()))
}
