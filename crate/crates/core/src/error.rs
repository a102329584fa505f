use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value {value} at sample (xi = {xi}, zeta = {zeta})")]
    NonFinite { xi: f64, zeta: f64, value: f64 },

    #[error("{0} must be symmetric")]
    NotSymmetric(&'static str),

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("shape mismatch: expected {expected}x{expected}, got {rows}x{cols}")]
    Shape {
        expected: usize,
        rows: usize,
        cols: usize,
    },

    #[error("value {value} lies outside the grid box [{lo}, {hi}]")]
    OutsideGrid { value: f64, lo: f64, hi: f64 },

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("value {value} lies outside the convex hull [{lo}, {hi}] of the value set")]
    OutsideHull { value: f64, lo: f64, hi: f64 },

    #[error("mean constraint {mean} cannot be met on the value grid")]
    InfeasibleMean { mean: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
