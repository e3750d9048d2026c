use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid group structure: {0}")]
    InvalidStructure(String),

    #[error("invalid reward model for arm {arm}: {reason}")]
    InvalidRewardModel { arm: usize, reason: String },

    #[error("expected {expected} reward models, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("LP dimension mismatch: {0}")]
    LpDimension(String),

    #[error("LP numerical breakdown: {0}")]
    LpBreakdown(String),

    #[error("subset enumeration over {arms} arms exceeds the cap of {cap}; pass the force flag to override")]
    EnumerationCap { arms: usize, cap: usize },

    #[error("malformed flow network: {0}")]
    MalformedGraph(String),

    #[error("root finding did not converge: {0}")]
    NonConvergence(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("file format error: {0}")]
    Format(String),

    #[error("unknown policy `{0}`")]
    UnknownPolicy(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
