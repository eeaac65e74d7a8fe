use crate::model::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("index mismatch: {0}")]
    IndexMismatch(String),

    #[error("request {request} does not have exactly one instance assigned for every chain type")]
    UnassignedChain { request: usize },

    #[error("instance failed validation: {0}")]
    ValidationFailed(ValidationReport),

    #[error("missing variable `{0}`")]
    MissingVariable(String),

    #[error("auxiliary variable `{0}` does not equal its product definition")]
    AuxiliaryInconsistent(String),

    #[error("variable `{name}` has non-binary value {value}")]
    NonBinaryValue { name: String, value: f64 },

    #[error("enumeration space of {size} combinations exceeds the cap of {cap}")]
    TooLarge { size: u128, cap: u128 },

    #[error("offline placement of the existing requests is infeasible")]
    BootstrapInfeasible,

    #[error("unsupported format version `{0}`")]
    FormatVersion(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
