use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,

    #[error("row {row}: follow-up time must be positive and finite, got {time}")]
    NonPositiveTime { row: usize, time: f64 },

    #[error("row {row}: expected {expected} covariates, found {found}")]
    DimensionMismatch { row: usize, expected: usize, found: usize },

    #[error("row {row}: unknown status code {code} (expected 0, 1 or 2)")]
    UnknownStatusCode { row: usize, code: i64 },

    #[error("row {row}: covariate {column} is not finite")]
    NonFiniteCovariate { row: usize, column: usize },

    #[error("no cause-1 events available for fitting")]
    NoEvents,

    #[error("center {center} has {size} subject(s); a per-center censoring curve needs at least 2")]
    DegenerateStratum { center: i64, size: usize },

    #[error("censoring survival is zero at {time} for a cause-2 subject; weight is undefined")]
    ZeroDenominator { time: f64 },

    #[error("linear predictor overflow while evaluating the likelihood")]
    NumericOverflow,

    #[error("information matrix is singular even after ridge jitter")]
    SingularInformation,

    #[error("fit has an empty active set")]
    EmptyActiveSet,

    #[error("adaptive weights require a converged unpenalized fit")]
    UnpenalizedFitRequired,

    #[error("invalid penalty: {0}")]
    InvalidPenalty(String),

    #[error("coordinate descent is only available for marginal and pooled models without groups")]
    CoordinateDescentUnsupported,

    #[error("baseline subdistribution hazard cannot be estimated under high stratification")]
    HighStratificationUnsupported,

    #[error("cause-1 time inversion failed to bracket the target probability {target}")]
    InversionFailure { target: f64 },

    #[error("no evaluable pairs for the concordance index")]
    NoEvaluablePairs,

    #[error("prognostic index needs at least two distinct values")]
    DegeneratePI,

    #[error("censoring survival is zero before horizon {horizon}")]
    HorizonBeyondSupport { horizon: f64 },

    #[error("factor `{0}` is missing")]
    MissingFactor(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
