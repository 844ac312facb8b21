use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    MissingFile(PathBuf),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("mapping references column `{column}` absent from the header of {path}")]
    MappingColumnAbsent { column: String, path: PathBuf },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("sensation vote {0} outside [-3, 3]")]
    VoteOutOfRange(f64),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("feature `{0}` absent from every record")]
    FeatureAbsent(String),

    #[error("record {index} is missing `{feature}`")]
    MissingFeature { index: usize, feature: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("width mismatch: model expects {expected} inputs, got {actual}")]
    WidthMismatch { expected: usize, actual: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("PMV clothing-temperature iteration did not converge within {0} iterations")]
    PmvNoConvergence(usize),

    #[error("every layer is frozen; nothing to train")]
    AllLayersFrozen,

    #[error("loss became NaN at epoch {epoch} (batch {batch})")]
    NanLoss { epoch: usize, batch: usize },

    #[error("model file: {0}")]
    ModelFormat(String),

    /// Wrong magic header or unsupported format version.
    #[error("unsupported model file: found {found}, expected {expected}")]
    ModelVersion { found: String, expected: String },

    #[error("empty pool: {0}")]
    EmptyPool(String),

    #[error("transfer contract: {0}")]
    TransferContract(String),

    #[error("resampling: {0}")]
    Resample(String),

    #[error("too few rows: need at least {needed}, have {have}")]
    TooFewRows { needed: usize, have: usize },

    #[error("class {0} is absent from every training fold")]
    ClassAbsentFromTraining(i8),

    #[error("data leak: {0}")]
    Leak(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
