//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate rating for user `{user}`, item `{item}`")]
    DuplicateRating { user: String, item: String },

    #[error("rating {rating} for user `{user}`, item `{item}` outside scale [{min}, {max}]")]
    OutOfScale {
        user: String,
        item: String,
        rating: f64,
        min: f64,
        max: f64,
    },

    #[error("non-finite rating for user `{user}`, item `{item}`")]
    InvalidValue { user: String, item: String },

    #[error("no rating records supplied")]
    NoRecords,

    #[error("masking fraction {0} must lie strictly between 0 and 1")]
    InvalidFraction(f64),

    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("item labels are not a numeric time index")]
    NotTimeSeries,

    #[error("item labels do not form a uniform time grid")]
    NotUniformGrid,

    #[error("invalid sample rates: source {source_hz} Hz, target {target_hz} Hz")]
    InvalidRate { source_hz: f64, target_hz: f64 },

    #[error("training set has no observed ratings")]
    EmptyTrainingSet,

    #[error("training diverged at iteration {iteration} (loss {loss})")]
    Diverged { iteration: usize, loss: f64 },

    #[error("test cell set is empty")]
    EmptyTestSet,

    #[error("degenerate rating scale: min {min} >= max {max}")]
    DegenerateScale { min: f64, max: f64 },

    #[error("need at least two users for a bootstrap interval, got {0}")]
    InsufficientData(usize),

    #[error("user `{0}` has no group label")]
    MissingLabel(String),

    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),

    #[error("invalid experiment plan: {0}")]
    InvalidPlan(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors that indicate bad configuration or input validation
    /// rather than a runtime failure. The CLI maps these to exit code 2.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidFraction(_)
                | Error::InvalidHyperparameter(_)
                | Error::InvalidPlan(_)
                | Error::Config(_)
        )
    }
}
