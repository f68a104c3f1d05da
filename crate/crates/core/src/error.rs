use thiserror::Error;

use crate::baselines::soft_impute::SoftImputeFit;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate entry for user {user}, item {item}")]
    DuplicateEntry { user: usize, item: usize },

    #[error("{what} id {id} out of range (bound {bound})")]
    IdOutOfRange {
        what: &'static str,
        id: usize,
        bound: usize,
    },

    #[error("rating matrix has no observed entries")]
    EmptyMatrix,

    #[error("kernel weight needs at least one available distance")]
    BothArgsNull,

    #[error("bandwidth grid is empty")]
    EmptyGrid,

    #[error("too few observations: need at least {needed}, have {got}")]
    TooFewObservations { needed: usize, got: usize },

    #[error("SVD failed to converge")]
    SvdFailure,

    #[error("soft-impute did not converge after {} iterations (delta {:.3e})", fit.iterations, fit.final_delta)]
    NonConvergence { fit: Box<SoftImputeFit> },

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible split: {cold} cold-start cells exceed the test budget of {budget}")]
    InfeasibleSplit { cold: usize, budget: usize },

    #[error("prediction and reference keys differ")]
    KeyMismatch,

    #[error("empty input")]
    EmptyInput,

    #[error("subsample kept no observations")]
    EmptyResult,

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("file contains no data rows")]
    EmptyFile,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn out_of_range(what: &'static str, id: usize, bound: usize) -> Self {
        Error::IdOutOfRange { what, id, bound }
    }
}
