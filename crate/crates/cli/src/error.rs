use std::fmt;

use lattice_light::{Error, ErrorKind};

/// Exit codes. Usage errors reported by the argument parser also exit with 2.
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PHYSICS: i32 = 3;
pub const EXIT_CONVERGENCE: i32 = 4;
pub const EXIT_IO: i32 = 5;
pub const EXIT_SELFTEST: i32 = 6;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Physics(String),
    Convergence(String),
    Io(String),
    SelfTest(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Physics(_) => EXIT_PHYSICS,
            CliError::Convergence(_) => EXIT_CONVERGENCE,
            CliError::Io(_) => EXIT_IO,
            CliError::SelfTest(_) => EXIT_SELFTEST,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Physics(_) => "physics",
            CliError::Convergence(_) => "convergence",
            CliError::Io(_) => "io",
            CliError::SelfTest(_) => "selftest",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Physics(m) | CliError::Convergence(m) | CliError::Io(m) | CliError::SelfTest(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e.kind() {
            // engine input errors come from configuration values
            ErrorKind::Input => CliError::Config(msg),
            ErrorKind::Physics => CliError::Physics(msg),
            ErrorKind::Convergence => CliError::Convergence(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
