mod args;
mod commands;
mod manifest;

use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

/// Exit status and message for a failed command.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    /// Bad input or arguments.
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        let code = if e.kind() == std::io::ErrorKind::NotFound { 2 } else { 1 };
        Failure {
            code,
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<topicmine::Error> for Failure {
    fn from(e: topicmine::Error) -> Self {
        use topicmine::Error as E;
        match e {
            E::Io { path, source } => Failure::io(&path, source),
            E::InvalidConfig(_)
            | E::UnknownTopic { .. }
            | E::EmptyVocabulary
            | E::EmptyCorpus
            | E::NoTimestampedDocuments
            | E::InsufficientAnnotators(_) => Failure::usage(e.to_string()),
            other => Failure::runtime(other.to_string()),
        }
    }
}

impl From<topicmine_serve::ServeError> for Failure {
    fn from(e: topicmine_serve::ServeError) -> Self {
        match e {
            topicmine_serve::ServeError::Core(e) => e.into(),
            other => Failure::runtime(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
