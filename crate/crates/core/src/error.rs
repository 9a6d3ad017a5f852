use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point ({x}, {y}) lies outside the covariate grid extent")]
    OutOfExtent { x: f64, y: f64 },

    #[error("covariate grid has no data at ({x}, {y})")]
    NoData { x: f64, y: f64 },

    #[error("locus for transect '{transect}' at distance {distance} is empty after clipping to the study region")]
    EmptyLocus { transect: String, distance: f64 },

    #[error("record {record} has no exact location")]
    MissingLocation { record: usize },

    #[error("degenerate distribution: {0}")]
    Degenerate(String),

    #[error("error density underflows at every quadrature node for record {record}")]
    DensityUnderflow { record: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
