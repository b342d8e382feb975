use thiserror::Error;

/// Errors raised anywhere in the simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid warehouse spec: {0}")]
    InvalidSpec(String),

    #[error("could not place rack {rack} of cluster {cluster} after {attempts} attempts")]
    PackingFailed {
        cluster: usize,
        rack: usize,
        attempts: usize,
    },

    #[error("complex permittivity is undefined for PEC material `{0}`")]
    PecMaterial(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),

    #[error("path has no amplitude for frequency {0} Hz")]
    MissingFrequency(f64),

    #[error("grid dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: unknown key `{key}` in section [{section}]")]
    UnknownKey {
        line: usize,
        section: String,
        key: String,
    },

    #[error("{0}")]
    Range(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
