use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type. Variants map one-to-one onto the documented
/// failure modes of the public operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed record file {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("unsupported schema version {found} in {path} (expected {expected})")]
    SchemaVersion {
        path: PathBuf,
        found: u32,
        expected: u32,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        got: usize,
    },

    #[error("image {image_id} has {regions} region(s); at least 2 are required")]
    DegenerateImage { image_id: String, regions: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("supervision leak: predicate {predicate_id} is not in the training split")]
    SupervisionLeak { predicate_id: u32 },

    #[error("non-finite loss {loss} at episode {episode}")]
    NonFiniteLoss { episode: usize, loss: f64 },

    #[error(
        "brute force refused: {assignments} assignments exceed the cap of {cap} \
         (label set sizes {sizes:?})"
    )]
    BruteForceCap {
        assignments: u128,
        cap: u128,
        sizes: Vec<usize>,
    },

    #[error("invalid label ({subject_idx}, {object_idx}) for image with {regions} regions")]
    InvalidLabel {
        subject_idx: usize,
        object_idx: usize,
        regions: usize,
    },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("{0}")]
    MissingData(String),
}
