//! Crate-wide error type.
//!
//! Every fallible operation in the library returns [`Error`]. The variants are
//! deliberately fine-grained: callers such as the breakdown-point search need
//! to distinguish "this attack cannot be generated for this sample" (skip it)
//! from "the configuration is malformed" (abort the run).

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // ---- samples & contamination ----
    #[error("sample must contain at least one observation")]
    EmptySample,
    #[error("sample of length {actual} is too small for {what} (needs n >= {min})")]
    SampleTooSmall {
        what: &'static str,
        min: usize,
        actual: usize,
    },
    #[error("observation {index} = {value} is not finite")]
    NonFiniteObservation { index: usize, value: f64 },
    #[error("observation {index} = {value} violates the {domain} domain")]
    DomainViolation {
        index: usize,
        value: f64,
        domain: &'static str,
    },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("domain mismatch: {left} vs {right}")]
    DomainMismatch { left: String, right: String },
    #[error("expected a scalar sample, got regression pairs")]
    ExpectedScalarSample,
    #[error("expected a regression sample, got scalar observations")]
    ExpectedRegressionSample,
    #[error("contamination mask has no flagged positions")]
    EmptyMask,
    #[error("position {index} is out of range for sample of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    // ---- value spaces ----
    #[error("point has dimension {point} but the value space has dimension {space}")]
    DimensionMismatch { point: usize, space: usize },
    #[error("invalid value space: {0}")]
    InvalidValueSpace(String),

    // ---- estimators ----
    #[error("unknown estimator name `{0}`")]
    UnknownEstimator(String),
    #[error("invalid estimator parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate sample for {what}: {detail}")]
    DegenerateSample { what: &'static str, detail: String },
    #[error("estimator produced a non-finite value")]
    NonFiniteResult,

    // ---- equivariance ----
    #[error("invalid group action: {0}")]
    InvalidAction(String),
    #[error("group action `{action}` is incompatible with a {arity} sample")]
    IncompatibleAction { action: String, arity: &'static str },
    #[error("identity check requires an even sample length, got n = {0}")]
    OddSampleLength(usize),
    #[error("estimator `{estimator}` does not carry the `{tag}` tag")]
    MissingTag { estimator: String, tag: String },

    // ---- attacks ----
    #[error("invalid attack spec: {0}")]
    InvalidAttack(String),
    #[error("attack kind `{kind}` is incompatible with a {arity} sample")]
    IncompatibleAttack { kind: String, arity: &'static str },
    #[error("custom attacks require an explicit sample sequence")]
    CustomAttackNeedsSequence,
    #[error("estimator `{0}` carries no equivariance tag; supply a custom attack")]
    NoCanonicalAttack(String),

    // ---- breakdown detectors ----
    #[error("trajectory has {valid} valid entries; limit classification needs at least {min}")]
    TooFewValidEntries { valid: usize, min: usize },
    #[error("panel must contain at least {min} samples, got {actual}")]
    PanelTooSmall { min: usize, actual: usize },
    #[error("panel members {first} and {second} are identical; members must be pairwise distinct")]
    DuplicatePanelMember { first: usize, second: usize },
    #[error("panel members must share a common length: member 0 has n = {expected}, member {index} has n = {actual}")]
    PanelLengthMismatch {
        expected: usize,
        index: usize,
        actual: usize,
    },
    #[error("every trajectory was undecided; nothing to classify")]
    AllTrajectoriesUndecided,
    #[error("definition {definition} requires {needs}")]
    WrongTarget {
        definition: &'static str,
        needs: &'static str,
    },

    // ---- reachable sets ----
    #[error("outlier count s = {s} exceeds the sample length n = {n}")]
    TooManyOutliers { s: usize, n: usize },
    #[error("enumeration budget exceeded: {required} evaluations needed, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
    #[error("no analytic reachable formula for estimator `{0}`")]
    NoAnalyticFormula(String),
    #[error("analytic median formula requires odd n, got n = {0}")]
    EvenSampleLength(usize),
    #[error("outlier count s = {s} exceeds the half-sample bound k = {k}")]
    OutlierCountAboveHalf { s: usize, k: usize },
    #[error("nonnegative-mean formula requires a nonnegative sample")]
    RequiresNonnegativeDomain,
    #[error("invalid oracle parameters: {0}")]
    InvalidOracleParams(String),

    // ---- serialization / configuration ----
    #[error("CSV parse error at line {line}: {detail}")]
    CsvParse { line: usize, detail: String },
    #[error("CSV input is empty")]
    EmptyCsv,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
