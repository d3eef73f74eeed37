//! Observed-data ingest, normalisation, goodness-of-fit statistics and
//! calibration of the transmission scale.

mod fit;
mod observed;
mod stats;

use chrono::NaiveDate;
use thiserror::Error;

pub use fit::{fit_transmission_scale, FitResult, Grid, FIT_SERIES};
pub use observed::{
    ingest_column, ingest_observed, normalize, Normalization, ObservedSeries, Reference,
};
pub use stats::{align, compare, pearson, rmse, Aligned, ComparisonReport};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("csv: {0}")]
    Csv(String),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: date {date} repeats the previous row")]
    DuplicateDate { line: usize, date: NaiveDate },
    #[error("line {line}: date {date} is earlier than the previous row")]
    OutOfOrder { line: usize, date: NaiveDate },
    #[error("dates must be strictly increasing (at {0})")]
    NotIncreasing(NaiveDate),
    #[error("non-finite value at {0}")]
    NonFinite(NaiveDate),
    #[error("series is already normalised")]
    AlreadyNormalized,
    #[error("no prior-year value for {0}")]
    NoPriorYear(NaiveDate),
    #[error("zero reference value{}", .0.map(|d| format!(" for {d}")).unwrap_or_default())]
    ZeroReference(Option<NaiveDate>),
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("too few points ({0})")]
    TooShort(usize),
    #[error("zero variance")]
    ZeroVariance,
    #[error("observed data does not overlap the simulation window")]
    NoOverlap,
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("model: {0}")]
    Model(String),
}
