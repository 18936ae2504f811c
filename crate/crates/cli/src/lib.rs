//! Command-line front end: problem files, task execution and the
//! randomized verification suites.

pub mod exec;
pub mod problem;
pub mod report;
pub mod verify;

pub use exec::{run_problem, RunOptions};
pub use problem::{parse_file, Defaults, ProblemFile, Session, Task};
pub use report::{Report, VerifyReport};
pub use verify::{verify, VerifyOptions};

/// Exit status for a completed run whose assertions all held.
pub const EXIT_OK: u8 = 0;
/// Exit status when an assertion or a verification property failed.
pub const EXIT_ASSERTION: u8 = 1;
/// Exit status for unreadable, malformed or inconsistent input.
pub const EXIT_INPUT: u8 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Engine(#[from] microformal::Error),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

pub fn load_file(path: &std::path::Path) -> Result<ProblemFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    parse_file(&text)
}
