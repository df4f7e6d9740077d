use serde::Serialize;

/// Every failure the engine can report.
///
/// Variants carry enough context to build a structured error record (see
/// [`ErrorRecord`]) so batch sweeps can triage failures without parsing text.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("no integral split exists for n = {n} and alpha = {alpha}")]
    NonIntegralSplit { n: usize, alpha: String },

    #[error("oracle has zero mass on the selected set")]
    DegenerateOracle,

    #[error("training diverged: {0}")]
    DivergedTraining(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("invalid parameter `{field}`: {message}")]
    InvalidParameter { field: String, message: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate calibration: {0}")]
    DegenerateCalibration(String),

    #[error("splits do not overlap: {0}")]
    NonOverlappingSplits(String),

    #[error("query budget of {0} oracle draws exceeded")]
    QueryBudgetExceeded(usize),

    #[error("split space of size {size} exceeds enumeration cap {cap}")]
    EnumerationTooLarge { size: String, cap: usize },

    #[error("malformed IDX file: {0}")]
    MalformedIdx(String),

    #[error("class filter selected no points")]
    EmptySelection,

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonIntegralSplit { .. } => "non_integral_split",
            Error::DegenerateOracle => "degenerate_oracle",
            Error::DivergedTraining(_) => "diverged_training",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::UnsupportedModel(_) => "unsupported_model",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::Precondition(_) => "precondition",
            Error::DegenerateCalibration(_) => "degenerate_calibration",
            Error::NonOverlappingSplits(_) => "non_overlapping_splits",
            Error::QueryBudgetExceeded(_) => "query_budget_exceeded",
            Error::EnumerationTooLarge { .. } => "enumeration_too_large",
            Error::MalformedIdx(_) => "malformed_idx",
            Error::EmptySelection => "empty_selection",
            Error::Config { .. } => "config",
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }

    /// The offending field, when the error is attributable to one.
    pub fn field(&self) -> Option<&str> {
        match self {
            Error::InvalidParameter { field, .. } | Error::Config { field, .. } => Some(field),
            Error::Io { path, .. } => Some(path),
            _ => None,
        }
    }

    pub fn record(&self) -> ErrorRecord {
        ErrorRecord {
            code: self.code().to_string(),
            message: self.to_string(),
            field: self.field().map(str::to_string),
        }
    }
}

/// Serializable form of an [`Error`].
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct ErrorRecord {
    pub code: String,
    pub message: String,
    pub field: Option<String>,
}
