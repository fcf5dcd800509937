use thiserror::Error;

use crate::chain::Model;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("a chain needs at least 2 sites, got {0}")]
    TooFewSites(usize),

    #[error("operation `{op}` is not defined for the {model} model")]
    UnsupportedModel { model: Model, op: &'static str },

    #[error("exact diagonalization is capped at {max} sites, got {n}")]
    DimensionCap { n: usize, max: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("amplitudes violate the norm bound: |a1|^2 + |aN|^2 = {0}")]
    NormBound(f64),

    #[error("need at least {need} entries, got {have}")]
    TooFewEntries { have: usize, need: usize },

    #[error("no chain length reached the criterion within the time window")]
    NoArrivals,

    #[error("segment {0} has no fit")]
    MissingFit(usize),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
