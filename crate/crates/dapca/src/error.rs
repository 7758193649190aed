use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the dapca library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("non-numeric feature cell at row {row}, column {column}: {value:?}")]
    NonNumericCell {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("ragged row {row}: expected {expected} cells, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("empty table in {path}")]
    EmptyTable { path: PathBuf },

    #[error("label column {0:?} not found")]
    LabelColumnNotFound(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("class {label:?} has {count} member(s); at least 2 are required")]
    ClassTooSmall { label: String, count: usize },

    #[error("label/spec mismatch: {0}")]
    SpecMismatch(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("no non-negative eigenvalues: all components would decrease the objective")]
    AllNegativeSpectrum,

    #[error("knn: k={k} exceeds number of source points {n}")]
    KnnTooFewPoints { k: usize, n: usize },

    #[error("knn: duplicate neighbor index {index} in assignment row {row}")]
    DuplicateNeighbor { row: usize, index: usize },

    #[error("knn: neighbor index {index} out of range (source has {n} rows)")]
    NeighborOutOfRange { index: usize, n: usize },

    #[error("{0}")]
    MissingInput(String),

    #[error("reverse validation failed at stage {stage}: {reason}")]
    ReverseValidation { stage: String, reason: String },

    #[error("invalid model file {path}: {reason}")]
    InvalidModel { path: PathBuf, reason: String },

    #[error("zero denominator: a_top equals a_noda")]
    ZeroDenominator,
}

pub type Result<T> = std::result::Result<T, Error>;
