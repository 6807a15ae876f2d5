use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("project `{project_id}`: forecast must be positive, got {value}")]
    NonPositiveForecast { project_id: String, value: f64 },
    #[error("project `{project_id}`: actual must be non-negative, got {value}")]
    NegativeActual { project_id: String, value: f64 },
    #[error("project id must not be empty")]
    EmptyProjectId,
    #[error("duplicate project id `{0}`")]
    DuplicateProjectId(String),
    #[error("ramp-up observation references unknown project `{0}`")]
    UnknownProjectId(String),
    #[error("duplicate ramp-up year {year_index} for project `{project_id}`")]
    DuplicateYearIndex { project_id: String, year_index: u32 },
    #[error("ramp-up year index must be at least 1 (project `{0}`)")]
    InvalidYearIndex(String),
    #[error("invalid percentage {value}: {reason}")]
    InvalidPercent { value: f64, reason: &'static str },
    #[error("insufficient data: need at least {needed} records, found {found}")]
    InsufficientData { needed: usize, found: usize },
    #[error("operation needs raw samples but the distribution was built from a summary")]
    SummaryOnlyDistribution,
    #[error("quantile table is not monotone at p = {p}")]
    NonMonotoneQuantiles { p: f64 },
    #[error("p = {p} lies outside the stored quantile table [{min}, {max}]")]
    OutOfTableRange { p: f64, min: f64, max: f64 },
    #[error("accuracy of zero has no finite overestimate")]
    ZeroAccuracy,
    #[error("no sample has accuracy below 1")]
    NoOverestimatedSamples,
    #[error("argument {value} outside domain {domain}")]
    OutOfDomain { value: f64, domain: &'static str },
    #[error("confidence {0} gives no usable normal quantile (must exceed 0.5)")]
    DegenerateConfidence(f64),
    #[error("downside claim: {0}")]
    InvalidClaim(String),
    #[error("forecast: {0}")]
    InvalidForecast(String),
    #[error("no overlapping ramp-up data")]
    NoRampUpData,
    #[error("operation requires a {expected} distribution")]
    WrongDirection { expected: &'static str },
    #[error("no benchmark available: cannot conclude")]
    MissingCoreFindings,
}
