use szego_lab::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("tolerance not met: {0}")]
    Tolerance(String),
    #[error(transparent)]
    Numeric(#[from] Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 for tolerance and numerical failures, 2 for usage errors, 3 for
    /// guard violations near the boundary or the kernel pole.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Tolerance(_) | CliError::Io(_) => 1,
            CliError::Numeric(e) => match e {
                Error::Divergence { .. } | Error::GuardViolation { .. } | Error::PoleProximity { .. } => 3,
                Error::InvalidSpec(_)
                | Error::UnsupportedSpec(_)
                | Error::Parse(_)
                | Error::ZeroVector
                | Error::DimensionMismatch { .. }
                | Error::NotInterior { .. }
                | Error::PointOutsideChart => 2,
                _ => 1,
            },
        }
    }
}
