use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("queue is unstable: utilisation {rho} >= 1")]
    UnstableQueue { rho: f64 },
    #[error("no completed jobs at resolution {0}")]
    NoCompletedJobs(usize),
    #[error(transparent)]
    Core(#[from] layercomp_core::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;
