use thiserror::Error;

/// Failure modes shared by every stage of the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("capability error: {0}")]
    Capability(String),

    #[error("singular Cauchy dual at vertex {vertex}")]
    SingularDual { vertex: String },

    #[error("divergent series: {0}")]
    Divergence(String),

    #[error("quadrature aliasing: {points} points for degree span {span}")]
    Aliasing { points: usize, span: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
