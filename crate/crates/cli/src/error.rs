use std::fmt;
use std::path::Path;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PHYSICS: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;

/// Error carrying the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn physics(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_PHYSICS,
            message: message.into(),
        }
    }

    pub fn convergence(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONVERGENCE,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::usage(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<rotor_core::Error> for CliError {
    fn from(e: rotor_core::Error) -> Self {
        use rotor_core::Error as E;
        match e {
            E::NonConvergence(_) | E::TruncationTooSmall(_) => Self::convergence(e.to_string()),
            _ => Self::physics(e.to_string()),
        }
    }
}
