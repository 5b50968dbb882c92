use thiserror::Error;

use crate::model::Side;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong in the library.
///
/// The variants split into input validation problems and numerical failures;
/// [`Error::is_numerical`] tells them apart (the CLI maps them to distinct exit codes).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("barrier ordering violated at t={t}: lower {lower} >= upper {upper}")]
    BarrierOrdering { t: f64, lower: f64, upper: f64 },

    #[error("{side} rebate given without a {side} barrier")]
    RebateWithoutBarrier { side: Side },

    #[error("rebate must be nonnegative, got {0}")]
    NegativeRebate(f64),

    #[error("tabulated barrier knots must be strictly increasing in t (knot {index})")]
    KnotOrder { index: usize },

    #[error("tabulated barrier knots span [{first}, {last}] which does not cover [0, {horizon}]")]
    KnotCoverage { first: f64, last: f64, horizon: f64 },

    #[error("time {t} outside [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },

    #[error("probability {0} outside the admissible range")]
    Probability(f64),

    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),

    #[error("no sign change on [{a}, {b}]")]
    NoSignChange { a: f64, b: f64 },

    #[error("at least one barrier is required")]
    EmptyBarrierSet,

    #[error("initial price {s0} is on or beyond the {side} barrier {barrier}")]
    KnockedOut { side: Side, s0: f64, barrier: f64 },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("accuracy not reached within the search bracket [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("target {0} lies outside the attainable range")]
    Unattainable(f64),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("row {row} has {got} cells, expected {expected}")]
    RaggedRow {
        row: usize,
        got: usize,
        expected: usize,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for failures of a numerical procedure on otherwise valid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoSignChange { .. }
                | Error::NoBracket { .. }
                | Error::Unattainable(_)
                | Error::ResourceLimit(_)
        )
    }
}
