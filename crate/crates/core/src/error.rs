use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid value for `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("cannot normalize a zero-length direction")]
    ZeroDirection,

    #[error("distance must be positive, got {0} km")]
    NonPositiveDistance(f64),

    #[error("satellite is below the elevation mask of the terminal")]
    NotVisible,

    #[error("combining requires at least one received power")]
    EmptyCombination,

    #[error("the master satellite cannot be removed from its cluster")]
    MasterRemoval,

    #[error("slave index {index} out of range for a cluster with {len} slaves")]
    NoSuchSlave { index: usize, len: usize },

    #[error("phase advance is undefined for uniform clusters")]
    PhaseUndefined,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { field, reason: reason.into() }
}
