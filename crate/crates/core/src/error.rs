use thiserror::Error;

use crate::matrix::SparseBinMatrix;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("entry ({row}, {col}) out of range for a {n_rows}x{n_cols} matrix")]
    EntryOutOfRange {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },

    #[error("duplicate entry ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("modular rank contradicts the rational oracle: modular {modular}, rational {rational}")]
    BareissDisagreement { modular: usize, rational: usize },

    #[error("matrix dimension {dim} exceeds the limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("primes disagree on the kernel support at column {column}")]
    SupportAmbiguous { column: usize },

    #[error("{what}: {value} is not a valid probability")]
    InvalidProbability { what: &'static str, value: f64 },

    #[error("{0}")]
    InvalidParameter(String),

    #[error("truncation would leave no rows")]
    EmptyResult,

    #[error("{what} requires divisibility: {divisor} does not divide {value}")]
    DivisibilityViolation {
        what: &'static str,
        divisor: usize,
        value: usize,
    },

    #[error("adjacency matrix is not symmetric with zero diagonal")]
    NotSymmetric,

    #[error("no column has exactly one nonzero entry")]
    NoSingletonColumn,

    #[error("matrix is not a minimal linear dependency")]
    NotMinimal,

    #[error("classification lemma violated by\n{matrix}")]
    ClassificationViolation { matrix: SparseBinMatrix, detail: String },

    #[error("fixed-point equation has no root in [0, c] for c = {c}")]
    NoRootFound { c: f64 },

    #[error("{method} did not converge within {iterations} iterations")]
    ConvergenceFailure {
        method: &'static str,
        iterations: usize,
    },

    #[error("row weights are not uniform (found {min}..={max})")]
    RowWeightNotUniform { min: usize, max: usize },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("target {target} equals d times the most common entry")]
    ForbiddenTarget { target: String },
}
