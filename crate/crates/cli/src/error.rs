use thiserror::Error;

/// Failures of a CLI invocation, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration, flags or input data (exit 1).
    #[error("{0}")]
    Validation(String),
    /// A numerical step failed (exit 2).
    #[error("{0}")]
    Numeric(String),
    /// The hypothesis cannot be satisfied (exit 3).
    #[error("{0}")]
    Unsatisfiable(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numeric(_) | CliError::Io(_) => 2,
            CliError::Unsatisfiable(_) => 3,
        }
    }
}

impl From<arealaw::Error> for CliError {
    fn from(e: arealaw::Error) -> Self {
        use arealaw::Error as E;
        let msg = e.to_string();
        match e {
            E::InvalidLattice(_)
            | E::SiteOutOfRange { .. }
            | E::Divisibility { .. }
            | E::RegionOutOfBounds(_)
            | E::DimensionCap { .. }
            | E::InvalidParameter(_)
            | E::Data(_)
            | E::EmptyRegion => CliError::Validation(msg),
            E::Unsatisfiable { .. } => CliError::Unsatisfiable(msg),
            _ => CliError::Numeric(msg),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Numeric(format!("serialization: {e}"))
    }
}
