use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("incompatible field tags: {0}")]
    FieldTag(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid surface preset: {0}")]
    Preset(String),

    #[error("orbit enumeration exceeded the node cap of {cap} states")]
    BudgetExceeded { cap: usize },

    #[error("window too small: {0}")]
    UndersizedWindow(String),

    #[error("not horizontally short (at this window size): {0}")]
    NotHorizontallyShort(String),

    #[error("return vector not found after {growths} window growths")]
    WindowExhausted { growths: usize },

    #[error("point outside the section domain: {0}")]
    Domain(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
