use thiserror::Error;

/// Errors raised across the simulator, perception, network and learning layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("invalid object spec: {0}")]
    InvalidObject(String),

    #[error("could not place object {index} after {attempts} attempts")]
    PlacementFailed { index: usize, attempts: usize },

    #[error("scenario parse error at line {line}: {message}")]
    ScenarioParse { line: usize, message: String },

    #[error("pixel ({row}, {col}) outside {rows}x{cols} map")]
    PixelOutOfBounds {
        row: i64,
        col: i64,
        rows: usize,
        cols: usize,
    },

    #[error("point ({x}, {y}) outside the workspace")]
    PointOutOfBounds { x: f64, y: f64 },

    #[error("resolution mismatch: {0} vs {1}")]
    ResolutionMismatch(usize, usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("no valid action: the action mask is empty")]
    EmptyMask,

    #[error("replay buffer is empty")]
    EmptyBuffer,

    #[error("no results to aggregate")]
    EmptyResults,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
