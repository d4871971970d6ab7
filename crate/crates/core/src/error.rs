use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty region")]
    EmptyRegion,
    #[error("region has no boundary: it covers the whole window")]
    NoBoundary,
    #[error("site {site} is outside a window of {count} sites")]
    SiteOutOfRange { site: usize, count: usize },
    #[error("regions overlap: {0}")]
    Overlap(String),
    #[error("buffers overlap: regions are {distance} apart, need at least {required}")]
    BuffersOverlap { distance: usize, required: usize },
    #[error("region mismatch: {0}")]
    RegionMismatch(String),
    #[error("conditioning on null event")]
    NullEvent,
    #[error("capacity exceeded: {what} is {got}, limit {limit}")]
    Capacity { what: &'static str, got: usize, limit: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),
    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("ground state is degenerate (gap {gap:e}); pass an explicit override to use it")]
    Degenerate { gap: f64 },
    #[error("state file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
