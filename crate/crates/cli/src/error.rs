use std::path::PathBuf;

use ruin_core::Error as CoreError;
use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("validation failed at {failed} of {total} points")]
    ValidationFailed { failed: usize, total: usize },
}

pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const NO_DRIFT: i32 = 3;
    pub const INFINITE_MOMENT: i32 = 4;
    pub const NO_CERTIFICATE: i32 = 5;
    pub const RESIDUAL_TOO_LARGE: i32 = 6;
    pub const VALIDATION_FAILED: i32 = 7;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(CoreError::NoDrift { .. }) => exit::NO_DRIFT,
            CliError::Core(CoreError::InfiniteMoment(_)) => exit::INFINITE_MOMENT,
            CliError::Core(CoreError::NoCertificate { .. }) => exit::NO_CERTIFICATE,
            CliError::Core(CoreError::ResidualTooLarge { .. }) => exit::RESIDUAL_TOO_LARGE,
            CliError::ValidationFailed { .. } => exit::VALIDATION_FAILED,
            _ => exit::CONFIG,
        }
    }

    /// Message for the terminal; a failed net profit condition means `ψ ≡ 1`.
    pub fn message(&self) -> String {
        match self {
            CliError::Core(CoreError::NoDrift { drift }) => {
                format!("net profit condition fails (E G - E C = {drift}): ψ ≡ 1")
            }
            e => e.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_are_distinct() {
        let errs = [
            CliError::Config("x".into()),
            CliError::Core(CoreError::NoDrift { drift: -1.0 }),
            CliError::Core(CoreError::InfiniteMoment("E C".into())),
            CliError::Core(CoreError::NoCertificate { m_max: 1 }),
            CliError::Core(CoreError::ResidualTooLarge {
                residual: 1.0,
                tolerance: 0.1,
                nodes: 8,
            }),
            CliError::ValidationFailed { failed: 1, total: 2 },
        ];
        let mut codes: Vec<i32> = errs.iter().map(|e| e.exit_code()).collect();
        assert!(codes.iter().all(|&c| c != exit::OK));
        codes.dedup();
        assert_eq!(codes.len(), errs.len());
        assert!(errs[1].message().contains("ψ ≡ 1"));
    }
}
