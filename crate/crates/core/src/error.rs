use thiserror::Error;

/// Errors produced by degradation, analysis, and pipeline operations.
#[derive(Debug, Error)]
pub enum Error {
    /// Two rasters that must share dimensions do not.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// An argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A pipeline configuration is malformed or empty.
    #[error("invalid config: {0}")]
    Config(String),

    /// A required external tool or variable is missing from the environment.
    #[error("environment: {0}")]
    Environment(String),

    /// An external tool returned data that violates the codec contract.
    #[error("integrity: {0}")]
    Integrity(String),

    /// A differentiable model failed its derivative consistency check.
    #[error("model: {0}")]
    Model(String),

    /// File or process I/O failure.
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    /// A pipeline stage failed; carries the stage position and kind.
    #[error("stage {index} ({kind}): {source}")]
    Stage {
        index: usize,
        kind: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_stage(self, index: usize, kind: &'static str) -> Error {
        Error::Stage {
            index,
            kind,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
