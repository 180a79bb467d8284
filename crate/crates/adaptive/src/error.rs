use thiserror::Error;

#[derive(Debug, Error)]
pub enum AdaptiveError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad magic number {found:#010x}, expected {expected:#010x}")]
    BadMagic { expected: u32, found: u32 },
    #[error("file truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("{images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("weight layer {0} is all zeros")]
    AllZeroLayer(usize),
    #[error("scores need both classes present")]
    SingleClass,
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error(transparent)]
    Core(#[from] layercomp_core::Error),
}

pub type Result<T> = std::result::Result<T, AdaptiveError>;
