use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point variant {point} is incompatible with hypothesis variant {hypothesis}")]
    VariantMismatch {
        hypothesis: &'static str,
        point: &'static str,
    },

    #[error("sampler starved after {rejections} rejections")]
    SamplerStarved { rejections: u64 },

    #[error("version space is empty")]
    EmptyVersionSpace,

    #[error("select exhausted {rounds} rounds without finding a splitting candidate")]
    SelectExhausted { rounds: usize },

    #[error("sampled version space has zero estimated diameter")]
    DegenerateVersionSpace,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
