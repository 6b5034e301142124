use thiserror::Error;

/// Errors surfaced by the estimation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("path {index}: delay {delay_s:e} s is not inside the cyclic prefix [0, {cp_s:e})")]
    DelayOutsideCp {
        index: usize,
        delay_s: f64,
        cp_s: f64,
    },

    #[error("expected exactly one LOS path, found {0}")]
    LosCount(usize),

    #[error("offset trace has {got} packets, scenario has {expected}")]
    TraceLength { expected: usize, got: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("null space is empty (signal rank {rank} fills all {rows} rows)")]
    EmptyNullSpace { rank: usize, rows: usize },

    #[error("degenerate basis: {0}")]
    DegenerateBasis(String),

    #[error("cutoff {0} rad/sample outside (0, pi)")]
    Cutoff(f64),

    #[error("config parse error: {0}")]
    Config(#[from] toml::de::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
