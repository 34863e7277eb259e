//! Error type shared across the crate.

/// Errors produced by model construction, estimation and diagnostics.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A lag set was empty where at least one lag is required.
    #[error("lag set is empty")]
    EmptyLags,

    /// A lag was zero or negative.
    #[error("lag {0} is not a positive integer")]
    NonPositiveLag(i64),

    /// A series was too short for the requested operation.
    #[error("series too short: need at least {need} observations, got {got}")]
    TooShort { need: usize, got: usize },

    /// A series value was NaN or infinite.
    #[error("non-finite value at position {0} (1-based)")]
    NonFiniteValue(usize),

    /// A partial autocorrelation was on or outside the unit-cube boundary.
    #[error("partial autocorrelation at lag {lag} is not interior to (-1, 1): {value}")]
    BoundaryParameter { lag: usize, value: f64 },

    /// AR coefficients do not correspond to a stationary-causal model.
    #[error("coefficients do not define a stationary-causal model")]
    NonStationary,

    /// The lattice recursion ran out of signal energy.
    #[error("series energy vanished at stage {0} of the lattice recursion")]
    DegenerateSeries(usize),

    /// Sum-of-squares kernel requested for an order the series cannot support.
    #[error("series length {n} must exceed model order {p}")]
    SeriesShorterThanOrder { n: usize, p: usize },

    /// The quadratic form S was non-positive, signalling numerical breakdown.
    #[error("sum of squares is not positive: {0}")]
    NonPositiveS(f64),

    /// The optimizer exhausted its iteration budget.
    #[error("optimizer failed to converge within {0} iterations")]
    NoConvergence(usize),

    /// The optimizer finished with an estimate pinned at the stationarity
    /// boundary; the fit is reported as an error rather than silently kept.
    #[error("estimate for lag {lag} pinned at the stationarity boundary ({value})")]
    BoundaryConvergence { lag: usize, value: f64 },

    /// An information matrix was numerically singular.
    #[error("information matrix is numerically singular for lags {lags:?}")]
    SingularInformation { lags: Vec<usize> },

    /// A subset lag exceeded the available partial-autocorrelation table.
    #[error("lag {lag} exceeds the table maximum {max}")]
    LagBeyondTable { lag: usize, max: usize },

    /// The model order does not fit inside the series.
    #[error("model order {p} does not fit in a series of length {n}")]
    OrderExceedsLength { p: usize, n: usize },

    /// Residuals have zero variance; autocorrelations are undefined.
    #[error("residual series has zero variance")]
    ZeroVariance,

    /// Portmanteau degrees of freedom would be non-positive.
    #[error("degrees of freedom not positive: {lags} lags with {m} parameters")]
    DegreesOfFreedomNonPositive { lags: usize, m: usize },

    /// Forecasting history shorter than the model order.
    #[error("history of length {got} is shorter than the model order {need}")]
    HistoryTooShort { need: usize, got: usize },

    /// A negative base cannot be raised to a fractional power.
    #[error("negative value {0} cannot be raised to a fractional power")]
    NegativeBase(f64),

    /// Invalid user-facing configuration.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
