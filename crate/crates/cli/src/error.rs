use rbeig_core::analysis::AnalysisError;
use rbeig_core::fem::FemError;
use rbeig_core::rom::RomError;
use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("mesh: {0}")]
    Mesh(#[source] FemError),
    #[error("basis has {found} rows but the mesh has {expected} unknowns")]
    BasisMismatch { expected: usize, found: usize },
    #[error("basis dimension {r} is below the requested {p} eigenpairs")]
    BasisTooSmall { r: usize, p: usize },
    #[error(transparent)]
    Rom(#[from] RomError),
    #[error("bound analysis: {0}")]
    Analysis(#[from] AnalysisError),
    #[error("{failed} of {total} sweep parameters failed")]
    SweepFailures { failed: usize, total: usize },
    #[error("{violations} bound violations beyond slack")]
    BoundFailure { violations: usize },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 bound failure, 2 solver or runtime failure, 3 configuration error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::BoundFailure { .. } => 1,
            CliError::Config(_) | CliError::Mesh(_) | CliError::BasisMismatch { .. } | CliError::BasisTooSmall { .. } => 3,
            CliError::Rom(_) | CliError::Analysis(_) | CliError::SweepFailures { .. } | CliError::Io(_) => 2,
        }
    }
}
