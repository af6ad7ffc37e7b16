//! Command-line front end for `densem`.

mod args;
mod run;

use std::io::Write;
use std::path::PathBuf;

use thiserror::Error;

pub use args::{parse_invocation, Cli, Commands, EvalSource, RunPlan};
pub use run::execute;

#[derive(Debug, Error)]
pub enum CliError {
    /// Rendered `--help` or `--version` text; not a failure.
    #[error("{0}")]
    Help(String),
    #[error("{0}")]
    Usage(String),
    #[error("{}: input not found", .0.display())]
    MissingInput(PathBuf),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Core(#[from] densem::Error),
}

impl CliError {
    fn from_clap(e: clap::Error) -> Self {
        use clap::error::ErrorKind;
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                CliError::Help(e.render().to_string())
            }
            _ => CliError::Usage(e.render().to_string()),
        }
    }

    /// 0 for help, 1 usage, 2 data or I/O, 3 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Help(_) => 0,
            CliError::Usage(_) => 1,
            CliError::Core(e) if e.is_numeric() => 3,
            _ => 2,
        }
    }
}

/// Parses and executes `argv`, writing the summary to `stdout` and errors to
/// standard error. Returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let result = parse_invocation(argv).and_then(|plan| execute(&plan, stdout));
    match result {
        Ok(()) => 0,
        Err(CliError::Help(text)) => {
            let _ = write!(stdout, "{text}");
            0
        }
        Err(CliError::Usage(text)) => {
            eprintln!("{}", text.trim_end());
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
