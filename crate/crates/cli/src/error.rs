use std::fmt;

use binohedge::PricingError;

/// A failed command, split by who has to fix it.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Malformed scenario, flag or trajectory.
    Input(String),
    /// Well-formed input the pricing engine cannot handle.
    Domain(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Domain(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) | CliError::Domain(msg) => f.write_str(msg),
        }
    }
}

impl std::error::Error for CliError {}

impl From<PricingError> for CliError {
    fn from(e: PricingError) -> Self {
        match e {
            PricingError::InvalidParameter { .. }
            | PricingError::TrajectoryLength { .. }
            | PricingError::InvalidPayoff(_) => CliError::Input(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
