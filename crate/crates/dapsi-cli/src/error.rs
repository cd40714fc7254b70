//! Error categories and their process exit codes.

use std::fmt;

/// A failure classified by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Invalid flags, config file or parameters (exit 2).
    Config(String),
    /// Unreadable input, unwritable output or unreachable peer (exit 3).
    Io(String),
    /// The protocol aborted (exit 4).
    Protocol(String),
}

impl CliError {
    /// Process exit code.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Io(_) => 3,
            Self::Protocol(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(m) => write!(f, "configuration error: {m}"),
            Self::Io(m) => write!(f, "i/o error: {m}"),
            Self::Protocol(m) => write!(f, "protocol aborted: {m}"),
        }
    }
}

impl From<dapsi::hamming::HamError> for CliError {
    fn from(e: dapsi::hamming::HamError) -> Self {
        use dapsi::hamming::HamError;
        match e {
            HamError::InvalidParams(_) | HamError::ComputeCapExceeded { .. } => Self::Config(e.to_string()),
            HamError::Transport(dapsi::transport::TransportError::Io(m)) => Self::Io(m),
            other => Self::Protocol(other.to_string()),
        }
    }
}

impl From<dapsi::intpsi::IntError> for CliError {
    fn from(e: dapsi::intpsi::IntError) -> Self {
        use dapsi::intpsi::IntError;
        match e {
            IntError::InvalidThreshold | IntError::InvalidBitLen(_) | IntError::OutOfRange { .. } => {
                Self::Config(e.to_string())
            }
            IntError::Transport(dapsi::transport::TransportError::Io(m)) => Self::Io(m),
            other => Self::Protocol(other.to_string()),
        }
    }
}

impl From<dapsi::transport::TransportError> for CliError {
    fn from(e: dapsi::transport::TransportError) -> Self {
        match e {
            dapsi::transport::TransportError::Io(m) => Self::Io(m),
            other => Self::Protocol(other.to_string()),
        }
    }
}
