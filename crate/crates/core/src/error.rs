use thiserror::Error;

use crate::view::ViewError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    View(#[from] ViewError),

    #[error("n = {0} is outside the supported range {1}")]
    InvalidN(u8, &'static str),

    #[error("simplex budget of {budget} exceeded")]
    ResourceLimit { budget: u64 },

    #[error("operation is undefined on the void complex")]
    VoidComplex,

    #[error("simplex is not in the complex")]
    SimplexAbsent,

    #[error("simplex is not free")]
    NotFree,

    #[error("expected a view complex or a chromatic subdivision, got a derived complex")]
    NotAViewComplex,

    #[error("batch {step}: representative is not G-free")]
    GFreeViolation { step: usize },

    #[error("not a permutation of [n]: {0:?}")]
    InvalidPermutation(Vec<u8>),

    #[error("invalid execution profile: {0}")]
    InvalidProfile(String),

    #[error("malformed cache file: {0}")]
    CacheFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
