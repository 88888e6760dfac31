use thiserror::Error;

use crate::controller::TraceRecord;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("arm transmission {name} = {value} is outside [0, 1]")]
    InvalidLoss { name: &'static str, value: f64 },

    #[error(
        "configuration cannot be balanced: required cos(phi) = {required:.6} has magnitude above 1"
    )]
    Unbalanceable { required: f64 },

    #[error("degenerate balance condition: {0}")]
    Degenerate(&'static str),

    #[error("balance loop did not converge after {iterations} iterations")]
    NotConverged {
        iterations: usize,
        trace: Vec<TraceRecord>,
    },

    #[error("segment length {segment} exceeds series length {len}")]
    SegmentTooLong { segment: usize, len: usize },

    #[error("series has zero variance; sigma-relative ADC scale is undefined")]
    ZeroVariance,

    #[error("extraction ratio {ratio:.6} exceeds entropy bound {bound:.6}")]
    RatioAboveBound { ratio: f64, bound: f64 },

    #[error("bit stream too short: {len} bits, at least {min} required")]
    StreamTooShort { len: usize, min: usize },

    #[error("non-finite value produced: {0}")]
    NonFinite(&'static str),

    #[error("malformed series data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
