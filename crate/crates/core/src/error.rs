use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("site {site} is outside the chain 1..={n_sites}")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("invalid chain specification: {0}")]
    InvalidSpec(String),

    #[error("{n_sites} spins exceeds the dense simulation cap of {cap}")]
    SizeCap { n_sites: usize, cap: usize },

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("phase sampling aliased: intensity {intensity:e} at Nyquist order {order}")]
    Aliasing { order: i32, intensity: f64 },

    #[error("time grid is empty")]
    EmptyGrid,

    #[error("degenerate range: {0}")]
    DegenerateRange(String),

    #[error("degenerate trace: {0}")]
    DegenerateTrace(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: time {time} does not strictly increase")]
    NonMonotonic { line: usize, time: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
