use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid needs at least 3 nodes per side, got {0}")]
    TooFewNodes(usize),

    #[error("domain must be a nondegenerate square, got [{xmin}, {xmax}] x [{ymin}, {ymax}]")]
    BadBounds {
        xmin: f64,
        xmax: f64,
        ymin: f64,
        ymax: f64,
    },

    #[error("point ({0}, {1}) lies outside the computational domain")]
    OutsideDomain(f64, f64),

    #[error("unknown problem `{0}` (expected one of HJB-A, HJB-B, HJB-C, HJB-D, HJB-E)")]
    UnknownProblem(String),

    #[error("control set needs at least 4 directions, got {0}")]
    TooFewControls(usize),

    #[error("grids are not nested: reference has {reference} nodes per side, field has {field}")]
    NotNested { reference: usize, field: usize },

    #[error("method {0} needs a reference solution on the same grid")]
    MissingReference(&'static str),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed reference cache entry {path}: {reason}")]
    BadCache { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
