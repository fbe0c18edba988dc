use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph construction: {0}")]
    Construction(String),

    #[error("set {dominator:?} does not dominate {target:?}")]
    NotDominating {
        dominator: Vec<usize>,
        target: Vec<usize>,
    },

    #[error("exact solver guard exceeded: size {size} > limit {limit}")]
    SizeGuard { size: usize, limit: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid LP input: {0}")]
    LpInput(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
