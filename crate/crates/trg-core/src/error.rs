use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrgError {
    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("degenerate edge: endpoints closer than map resolution in xy")]
    DegenerateEdge,

    #[error("empty sample set")]
    EmptySamples,

    #[error("plane fit needs at least 3 non-collinear samples (got {0})")]
    PlaneRankDeficient(usize),

    #[error("start not standable")]
    StartNotStandable,

    #[error("start position attaches to no valid node within r_exp")]
    StartUnattachable,

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("scenario sampling budget exhausted for class {0}")]
    ScenarioBudget(String),

    #[error("zero traveled length")]
    ZeroTravel,
}

pub type Result<T> = std::result::Result<T, TrgError>;
