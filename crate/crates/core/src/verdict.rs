//! Breakdown verdicts.
//!
//! Every detector returns a [`Verdict`]: an outcome label plus the evidence
//! that justifies it. Broken outcomes always carry evidence (a trajectory
//! tail, a limit value, a limit set, or a pair of reachable hulls); undecided
//! verdicts always carry a human-readable reason.

use serde::{Deserialize, Serialize};

/// Outcome labels for breakdown detectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    /// The estimate sequence leaves every bounded set.
    BrokenDivergence,
    /// The estimate sequence converges to a boundary point of the value space.
    BrokenBoundary,
    /// One attack drives every sample in a panel to the same constant limit.
    BrokenConstantLimit,
    /// The reachable value set no longer depends on the sample.
    BrokenXIndependentSet,
    NotBroken,
    Undecided,
}

impl Outcome {
    pub fn is_broken(self) -> bool {
        matches!(
            self,
            Outcome::BrokenDivergence
                | Outcome::BrokenBoundary
                | Outcome::BrokenConstantLimit
                | Outcome::BrokenXIndependentSet
        )
    }
}

/// Supporting data for a verdict. Fields are populated as applicable; the
/// constructors on [`Verdict`] fill in the ones each outcome requires.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    /// Norms of the last few trajectory values (divergence evidence).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_norms: Option<Vec<f64>>,
    /// Limit value `t0` when a trajectory converged.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<Vec<f64>>,
    /// Collapsed limit set (one representative per cluster).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit_set: Option<Vec<Vec<f64>>>,
    /// Reachable hulls per panel member as `(lo, hi)` spans.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hulls: Option<Vec<(f64, f64)>>,
    /// Reason string; mandatory for undecided verdicts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// A detector's conclusion together with its evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub evidence: Evidence,
}

impl Verdict {
    pub fn broken_divergence(tail_norms: Vec<f64>) -> Self {
        Verdict {
            outcome: Outcome::BrokenDivergence,
            evidence: Evidence {
                tail_norms: Some(tail_norms),
                ..Evidence::default()
            },
        }
    }

    pub fn broken_boundary(limit: Vec<f64>) -> Self {
        Verdict {
            outcome: Outcome::BrokenBoundary,
            evidence: Evidence {
                limit: Some(limit),
                ..Evidence::default()
            },
        }
    }

    pub fn broken_constant_limit(limit: Vec<f64>, limit_set: Vec<Vec<f64>>) -> Self {
        Verdict {
            outcome: Outcome::BrokenConstantLimit,
            evidence: Evidence {
                limit: Some(limit),
                limit_set: Some(limit_set),
                ..Evidence::default()
            },
        }
    }

    pub fn broken_x_independent_set(hulls: Vec<(f64, f64)>) -> Self {
        Verdict {
            outcome: Outcome::BrokenXIndependentSet,
            evidence: Evidence {
                hulls: Some(hulls),
                ..Evidence::default()
            },
        }
    }

    pub fn not_broken(reason: impl Into<String>) -> Self {
        Verdict {
            outcome: Outcome::NotBroken,
            evidence: Evidence {
                reason: Some(reason.into()),
                ..Evidence::default()
            },
        }
    }

    pub fn undecided(reason: impl Into<String>) -> Self {
        Verdict {
            outcome: Outcome::Undecided,
            evidence: Evidence {
                reason: Some(reason.into()),
                ..Evidence::default()
            },
        }
    }

    pub fn is_broken(&self) -> bool {
        self.outcome.is_broken()
    }

    /// Attach or replace the free-form reason on any verdict.
    pub fn with_reason(mut self, reason: impl Into<String>) -> Self {
        self.evidence.reason = Some(reason.into());
        self
    }

    /// Attach per-member hull evidence (used by the reachable-set detector).
    pub fn with_hulls(mut self, hulls: Vec<(f64, f64)>) -> Self {
        self.evidence.hulls = Some(hulls);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn broken_outcomes_carry_evidence() {
        let v = Verdict::broken_divergence(vec![1e6, 1e7, 1e8]);
        assert!(v.is_broken());
        assert_eq!(v.evidence.tail_norms.as_deref(), Some(&[1e6, 1e7, 1e8][..]));

        let v = Verdict::broken_boundary(vec![0.0]);
        assert_eq!(v.evidence.limit.as_deref(), Some(&[0.0][..]));
    }

    #[test]
    fn undecided_carries_reason() {
        let v = Verdict::undecided("tail neither grew nor settled");
        assert_eq!(v.outcome, Outcome::Undecided);
        assert!(v.evidence.reason.is_some());
        assert!(!v.is_broken());
    }

    #[test]
    fn serializes_with_kebab_case_outcomes() {
        let v = Verdict::broken_boundary(vec![0.0]);
        let json = serde_json::to_string(&v).unwrap();
        assert!(json.contains("\"broken-boundary\""));
    }
}
