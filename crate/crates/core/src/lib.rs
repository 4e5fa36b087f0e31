//! breaklab-core: a laboratory for competing notions of estimator
//! breakdown under adversarial contamination.
//!
//! The library models contaminated samples `(1 - s_i) x_i + s_i y_i`,
//! where an adversary replaces `s` of the `n` observations, and asks when
//! a statistic has *broken down*. Four formalizations coexist and
//! genuinely disagree:
//!
//! 1. the estimate can be driven beyond all bounds (`detect_def1`);
//! 2. it can be driven to the boundary of its value space, so implosion
//!    counts as well as explosion (`detect_def2`);
//! 3. one attack forces the *same* limit on every dataset, so the data no
//!    longer matter (`detect_def3`, with the limit-set generalization in
//!    `genton_lucas_limit_set`);
//! 4. the set of reachable values `T_s(X)` no longer depends on the clean
//!    data (`detect_def4`, built on the brute-force `reachable_oracle`).
//!
//! Attacks are constructed from the estimator's declared equivariance
//! structure (`equivariance`, `attacks`): shifting half the sample,
//! rescaling half the covariates, point masses, and single escaping
//! outliers. The catalog of classical statistics lives in [`estimators`];
//! sweeping outlier counts to find the smallest breaking fraction lives in
//! [`breakdown`].
//!
//! Numerical conventions shared across modules: skewness `b1` and kurtosis
//! `b2` use `1/n` central moments; trajectories are classified against
//! relative thresholds (divergence at `1e6 * (1 + ||T(X)||)`, convergence
//! at `1e-6`, limit agreement at `1e-4`); oracle hulls are box-truncated
//! and carry their resolution in provenance metadata.

pub mod attacks;
pub mod breakdown;
pub mod equivariance;
pub mod error;
pub mod estimators;
pub mod gen;
pub mod io;
pub mod reachable;
pub mod sample;
pub mod space;
pub mod verdict;

pub use attacks::{
    build_equivariant_attack, point_mass_attack, scale_half_x_attack, shift_half_attack,
    single_outlier_escape, AttackKind, AttackSequence, AttackSpec, Direction, DEFAULT_C0,
    DEFAULT_GAMMA, DEFAULT_STEPS, MAGNITUDE_CAP,
};
pub use breakdown::{
    breakdown_point, classify_limit, detect_def1, detect_def2, detect_def3, evaluate_trajectory,
    genton_lucas_limit_set, AttackCatalog, AttackTemplate, BreakdownPointResult, BreakdownTarget,
    DefinitionKind, DetectorConfig, LimitClassification, LimitOutcome, PerOutlierVerdict,
    Trajectory, TrajectoryEntry,
};
pub use equivariance::{
    check_equivariance_tag, check_glm_scaling_identity, check_translation_half_identity,
    GroupAction, IdentityReport, GLM_TOLERANCE, TAG_TOLERANCE,
};
pub use error::{Error, Result};
pub use estimators::{
    b1_outlier_limit, EquivarianceTag, EstimateValue, Estimator, EstimatorDescriptor,
};
pub use reachable::{
    detect_def4, informativeness_query, mean_reachable_nonneg, median_reachable_analytic,
    nesting_check, reachable_oracle, FamilySpec, InformativenessReport, Interval, NestingReport,
    OracleParams, Provenance, ReachableSet,
};
pub use sample::{contaminate, outlier_count, ContaminationMask, Domain, Observation, Sample};
pub use space::{classify_point, PointClass, ValueSpace};
pub use verdict::{Evidence, Outcome, Verdict};
