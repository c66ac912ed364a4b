use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("degenerate hull: {0}")]
    DegenerateHull(String),

    #[error("degenerate contact edge (length {0:.3e} m)")]
    DegenerateEdge(f64),

    #[error("malformed pattern graph: {0}")]
    MalformedGraph(String),

    #[error("infeasible assignment: {0}")]
    Infeasible(String),

    #[error("component of {size} primitives exceeds the exact-solver cap of {cap}; use the heuristic solver")]
    Capacity { size: usize, cap: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("scene generation failed (seed {seed}): {reason}")]
    Generation { seed: u64, reason: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("image error: {0}")]
    Image(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<image::ImageError> for Error {
    fn from(e: image::ImageError) -> Self {
        Error::Image(e.to_string())
    }
}
