//! Trajectory detectors for the competing breakdown definitions.
//!
//! A true limit `m -> infinity` is replaced by numerical classification of
//! the trajectory tail:
//!
//! * *diverged*: the last `L` norms are strictly increasing and the final
//!   norm exceeds `tau_div = 1e6 * (1 + ||T(X)||)`;
//! * *converged*: successive deltas over the last `L` steps all stay below
//!   `eps_conv = 1e-6 * (1 + ||last value||)`;
//! * otherwise *undecided*.
//!
//! Three detectors build on this classification:
//!
//! * definition 1 breaks on divergence alone;
//! * definition 2 additionally breaks when the limit is a boundary point of
//!   the estimator's value space (implosion);
//! * definition 3 asks the same attack to do the same thing to *every*
//!   dataset — the `for all X` is approximated by a finite panel of samples,
//!   so a pass is evidence, not proof.
//!
//! The limit-set detector generalizes definition 3: an attack exhibits
//! collapse when the limits it produces across the panel cluster into fewer
//! groups than there are panel members (the empty set — everything diverges
//! — and a singleton limit are the special cases).
//!
//! `breakdown_point` sweeps the outlier count `s` and reports the smallest
//! fraction `s/n` that breaks the estimator under a chosen definition. Each
//! `s` is tested independently: verdicts need not be monotone in `s` for
//! invariant statistics, so nothing is inferred from neighboring counts.

use serde::{Deserialize, Serialize};

use crate::attacks::{
    build_equivariant_attack, AttackKind, AttackSequence, AttackSpec, Direction, DEFAULT_C0,
    DEFAULT_GAMMA, DEFAULT_STEPS,
};
use crate::error::{Error, Result};
use crate::estimators::{EstimateValue, Estimator};
use crate::sample::{ContaminationMask, Sample};
use crate::space::{classify_point, PointClass, ValueSpace};
use crate::verdict::Verdict;

/// Thresholds for the numerical limit detectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Divergence threshold factor: `tau_div = divergence_factor * (1 + ||T(X)||)`.
    pub divergence_factor: f64,
    /// Convergence tolerance factor: `eps_conv = convergence_rel * (1 + ||last||)`.
    pub convergence_rel: f64,
    /// Number of trailing valid entries the classifier inspects.
    pub window: usize,
    /// Limit agreement factor: `delta_agree = agreement_rel * (1 + ||t0||)`.
    pub agreement_rel: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            divergence_factor: 1e6,
            convergence_rel: 1e-6,
            window: 3,
            agreement_rel: 1e-4,
        }
    }
}

/// One step of an evaluated attack: either an estimate or the reason the
/// estimator refused the contaminated sample (failures are data, recorded
/// and never raised).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryEntry {
    pub step: usize,
    pub magnitude: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<EstimateValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// The estimator evaluated along an attack sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub attack: AttackSpec,
    /// `T(X)` on the clean sample; `None` when the estimator's
    /// preconditions already fail there.
    pub baseline: Option<EstimateValue>,
    pub entries: Vec<TrajectoryEntry>,
    /// True when the attack's magnitude schedule hit the hard cap.
    pub saturated: bool,
}

impl Trajectory {
    fn valid_values(&self) -> Vec<&EstimateValue> {
        self.entries
            .iter()
            .filter_map(|entry| entry.value.as_ref())
            .collect()
    }
}

/// Evaluate the estimator at every step of a materialized attack.
pub fn evaluate_trajectory(est: &Estimator, seq: &AttackSequence) -> Trajectory {
    let baseline = est.evaluate(seq.base()).ok();
    let entries = seq
        .samples()
        .iter()
        .zip(seq.magnitudes())
        .enumerate()
        .map(|(i, (sample, &magnitude))| match est.evaluate(sample) {
            Ok(value) => TrajectoryEntry {
                step: i + 1,
                magnitude,
                value: Some(value),
                failure: None,
            },
            Err(err) => TrajectoryEntry {
                step: i + 1,
                magnitude,
                value: None,
                failure: Some(err.to_string()),
            },
        })
        .collect();
    Trajectory {
        attack: seq.spec().clone(),
        baseline,
        entries,
        saturated: seq.saturated_from().is_some(),
    }
}

/// Tail classification of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitOutcome {
    Diverged,
    Converged,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitClassification {
    pub outcome: LimitOutcome,
    /// The limit value when converged.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t0: Option<EstimateValue>,
    /// Norms of the trailing window.
    pub tail_norms: Vec<f64>,
    /// Successive deltas of the trailing window.
    pub tail_deltas: Vec<f64>,
    pub reason: String,
}

/// Classify the tail of a trajectory. Needs at least `cfg.window` entries
/// where the estimator actually produced a value.
pub fn classify_limit(traj: &Trajectory, cfg: &DetectorConfig) -> Result<LimitClassification> {
    let valid = traj.valid_values();
    if valid.len() < cfg.window {
        return Err(Error::TooFewValidEntries {
            valid: valid.len(),
            min: cfg.window,
        });
    }
    let window = &valid[valid.len() - cfg.window..];
    let tail_norms: Vec<f64> = window.iter().map(|v| v.norm()).collect();
    let tail_deltas: Vec<f64> = window
        .windows(2)
        .map(|pair| distance(pair[0], pair[1]))
        .collect();

    // A failure at the largest magnitude means the tail was never observed;
    // failures are non-convergent evidence, never divergence.
    if let Some(last) = traj.entries.last() {
        if last.value.is_none() {
            return Ok(LimitClassification {
                outcome: LimitOutcome::Undecided,
                t0: None,
                tail_norms,
                tail_deltas,
                reason: format!(
                    "the estimator failed at the final step: {}",
                    last.failure.as_deref().unwrap_or("unknown failure")
                ),
            });
        }
    }

    let baseline_norm = traj.baseline.as_ref().map(|v| v.norm()).unwrap_or(0.0);
    let tau_div = cfg.divergence_factor * (1.0 + baseline_norm);
    let strictly_increasing = tail_norms.windows(2).all(|w| w[1] > w[0]);
    let last_norm = *tail_norms.last().expect("window is nonempty");
    if strictly_increasing && last_norm > tau_div {
        return Ok(LimitClassification {
            outcome: LimitOutcome::Diverged,
            t0: None,
            tail_norms,
            tail_deltas,
            reason: format!("trailing norms grow past tau_div = {tau_div:.3e}"),
        });
    }

    let last = *window.last().expect("window is nonempty");
    let eps_conv = cfg.convergence_rel * (1.0 + last.norm());
    if !tail_deltas.is_empty() && tail_deltas.iter().all(|&d| d < eps_conv) {
        if traj.saturated {
            return Ok(LimitClassification {
                outcome: LimitOutcome::Undecided,
                t0: None,
                tail_norms,
                tail_deltas,
                reason: "the magnitude cap was reached before the trajectory resolved".into(),
            });
        }
        return Ok(LimitClassification {
            outcome: LimitOutcome::Converged,
            t0: Some(last.clone()),
            tail_norms,
            tail_deltas,
            reason: format!("trailing deltas stay below eps_conv = {eps_conv:.3e}"),
        });
    }

    Ok(LimitClassification {
        outcome: LimitOutcome::Undecided,
        t0: None,
        tail_norms,
        tail_deltas,
        reason: if traj.saturated {
            "the magnitude cap was reached before the trajectory resolved".into()
        } else {
            "the tail neither diverges past the threshold nor settles".into()
        },
    })
}

fn distance(a: &EstimateValue, b: &EstimateValue) -> f64 {
    a.components()
        .iter()
        .zip(b.components())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Classify, mapping "too few valid entries" to an undecided classification
/// instead of an error (detectors treat evaluation failures as data).
fn classify_or_undecided(traj: &Trajectory, cfg: &DetectorConfig) -> LimitClassification {
    match classify_limit(traj, cfg) {
        Ok(c) => c,
        Err(err) => LimitClassification {
            outcome: LimitOutcome::Undecided,
            t0: None,
            tail_norms: Vec::new(),
            tail_deltas: Vec::new(),
            reason: err.to_string(),
        },
    }
}

/// Definition 1: the attack drives `||T||` beyond all bounds.
pub fn detect_def1(
    est: &Estimator,
    x: &Sample,
    attack: &AttackSpec,
    cfg: &DetectorConfig,
) -> Result<Verdict> {
    let traj = evaluate_trajectory(est, &attack.materialize(x)?);
    let class = classify_or_undecided(&traj, cfg);
    Ok(match class.outcome {
        LimitOutcome::Diverged => Verdict::broken_divergence(class.tail_norms),
        LimitOutcome::Converged => Verdict::not_broken(format!(
            "the trajectory converges (||T|| stays bounded); {}",
            class.reason
        )),
        LimitOutcome::Undecided => Verdict::undecided(class.reason),
    })
}

/// Definition 2: definition 1, plus breakdown when the trajectory converges
/// to a boundary point of the value space.
pub fn detect_def2(
    est: &Estimator,
    x: &Sample,
    attack: &AttackSpec,
    space: &ValueSpace,
    cfg: &DetectorConfig,
) -> Result<Verdict> {
    let traj = evaluate_trajectory(est, &attack.materialize(x)?);
    let class = classify_or_undecided(&traj, cfg);
    Ok(match class.outcome {
        LimitOutcome::Diverged => Verdict::broken_divergence(class.tail_norms),
        LimitOutcome::Converged => {
            let t0 = class.t0.expect("converged classification carries t0");
            match classify_point(t0.components(), space)? {
                PointClass::Boundary => Verdict::broken_boundary(t0.components().to_vec()),
                PointClass::Interior => Verdict::not_broken(format!(
                    "converged to an interior point of the value space ({:?})",
                    t0.components()
                )),
                PointClass::Exterior => Verdict::undecided(format!(
                    "converged to {:?}, outside the declared value space — \
                     the space may be misdeclared",
                    t0.components()
                )),
            }
        }
        LimitOutcome::Undecided => Verdict::undecided(class.reason),
    })
}

pub(crate) fn validate_panel(panel: &[Sample]) -> Result<()> {
    if panel.len() < 2 {
        return Err(Error::PanelTooSmall {
            min: 2,
            actual: panel.len(),
        });
    }
    let expected = panel[0].len();
    for (index, member) in panel.iter().enumerate().skip(1) {
        if member.len() != expected {
            return Err(Error::PanelLengthMismatch {
                expected,
                index,
                actual: member.len(),
            });
        }
    }
    for first in 0..panel.len() {
        for second in first + 1..panel.len() {
            if panel[first] == panel[second] {
                return Err(Error::DuplicatePanelMember { first, second });
            }
        }
    }
    Ok(())
}

/// Definition 3: the same attack must do the same thing to every dataset —
/// either every panel member diverges, or every member converges to one
/// common limit (agreement within `delta_agree`).
pub fn detect_def3(
    est: &Estimator,
    panel: &[Sample],
    attack: &AttackSpec,
    cfg: &DetectorConfig,
) -> Result<Verdict> {
    validate_panel(panel)?;
    let classes: Vec<LimitClassification> = panel
        .iter()
        .map(|member| {
            Ok(classify_or_undecided(
                &evaluate_trajectory(est, &attack.materialize(member)?),
                cfg,
            ))
        })
        .collect::<Result<_>>()?;

    if let Some(i) = classes
        .iter()
        .position(|c| c.outcome == LimitOutcome::Undecided)
    {
        return Ok(Verdict::undecided(format!(
            "panel member {i} is undecided: {}",
            classes[i].reason
        )));
    }
    if classes.iter().all(|c| c.outcome == LimitOutcome::Diverged) {
        let tail = classes.last().expect("panel is nonempty").tail_norms.clone();
        return Ok(Verdict::broken_divergence(tail)
            .with_reason("every panel member diverges under the common attack"));
    }
    if classes.iter().all(|c| c.outcome == LimitOutcome::Converged) {
        let limits: Vec<&EstimateValue> = classes
            .iter()
            .map(|c| c.t0.as_ref().expect("converged carries t0"))
            .collect();
        let limit_set: Vec<Vec<f64>> =
            limits.iter().map(|v| v.components().to_vec()).collect();
        let max_norm = limits.iter().map(|v| v.norm()).fold(0.0_f64, f64::max);
        let delta_agree = cfg.agreement_rel * (1.0 + max_norm);
        let mut worst = 0.0_f64;
        for i in 0..limits.len() {
            for j in i + 1..limits.len() {
                worst = worst.max(distance(limits[i], limits[j]));
            }
        }
        if worst <= delta_agree {
            return Ok(Verdict::broken_constant_limit(
                limits[0].components().to_vec(),
                limit_set,
            ));
        }
        let mut verdict = Verdict::not_broken(format!(
            "limits are data-dependent: max pairwise distance {worst:.3e} \
             exceeds delta_agree = {delta_agree:.3e}"
        ));
        verdict.evidence.limit_set = Some(limit_set);
        return Ok(verdict);
    }
    Ok(Verdict::not_broken(
        "the attack mixes divergence and convergence across the panel, so no \
         common limit behavior holds for all X",
    ))
}

/// A cluster of limits produced by single-linkage grouping.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitCluster {
    /// Componentwise mean of the cluster's members.
    pub representative: Vec<f64>,
    pub members: usize,
}

fn cluster_limits(limits: &[&EstimateValue], gap: f64) -> Vec<LimitCluster> {
    // Single-linkage on at most a handful of panel limits: grow each cluster
    // by any point within `gap` of one of its members.
    let mut assigned = vec![false; limits.len()];
    let mut clusters = Vec::new();
    for start in 0..limits.len() {
        if assigned[start] {
            continue;
        }
        let mut members = vec![start];
        assigned[start] = true;
        let mut frontier = vec![start];
        while let Some(current) = frontier.pop() {
            for other in 0..limits.len() {
                if !assigned[other] && distance(limits[current], limits[other]) <= gap {
                    assigned[other] = true;
                    members.push(other);
                    frontier.push(other);
                }
            }
        }
        let dim = limits[start].components().len();
        let mut representative = vec![0.0; dim];
        for &m in &members {
            for (acc, c) in representative.iter_mut().zip(limits[m].components()) {
                *acc += c;
            }
        }
        for acc in &mut representative {
            *acc /= members.len() as f64;
        }
        clusters.push(LimitCluster {
            representative,
            members: members.len(),
        });
    }
    clusters
}

/// Limit-set collapse across a battery of attacks: an attack that resolves
/// on every panel member exhibits collapse when its finite limits cluster
/// into fewer groups than there are panel members. An attack under which
/// everything diverges collapses to the empty set; a common constant limit
/// collapses to a singleton.
pub fn genton_lucas_limit_set(
    est: &Estimator,
    panel: &[Sample],
    attacks: &[AttackSpec],
    cfg: &DetectorConfig,
) -> Result<Verdict> {
    validate_panel(panel)?;
    if attacks.is_empty() {
        return Err(Error::InvalidAttack("the attack battery is empty".into()));
    }
    let mut any_resolved_trajectory = false;
    let mut any_inconclusive_attack = false;
    let mut collapses: Vec<(String, Vec<LimitCluster>)> = Vec::new();
    let mut resolved_cluster_pool: Vec<LimitCluster> = Vec::new();

    for attack in attacks {
        let classes: Vec<LimitClassification> = panel
            .iter()
            .map(|member| {
                Ok(classify_or_undecided(
                    &evaluate_trajectory(est, &attack.materialize(member)?),
                    cfg,
                ))
            })
            .collect::<Result<_>>()?;
        if classes.iter().any(|c| c.outcome != LimitOutcome::Undecided) {
            any_resolved_trajectory = true;
        }
        if classes.iter().any(|c| c.outcome == LimitOutcome::Undecided) {
            any_inconclusive_attack = true;
            continue;
        }
        let limits: Vec<&EstimateValue> = classes
            .iter()
            .filter_map(|c| c.t0.as_ref())
            .collect();
        let max_norm = limits.iter().map(|v| v.norm()).fold(0.0_f64, f64::max);
        let gap = cfg.agreement_rel * (1.0 + max_norm);
        let clusters = cluster_limits(&limits, gap);
        let label = format!(
            "{}({:+})",
            attack.kind.name(),
            attack.direction.sign() as i64
        );
        resolved_cluster_pool.extend(clusters.iter().cloned());
        if clusters.len() < panel.len() {
            collapses.push((label, clusters));
        }
    }

    if !any_resolved_trajectory {
        return Err(Error::AllTrajectoriesUndecided);
    }
    if !collapses.is_empty() {
        let limit_set: Vec<Vec<f64>> = collapses
            .iter()
            .flat_map(|(_, clusters)| clusters.iter().map(|c| c.representative.clone()))
            .collect();
        let names: Vec<&str> = collapses.iter().map(|(name, _)| name.as_str()).collect();
        let first = limit_set.first().cloned().unwrap_or_default();
        let mut verdict = Verdict::broken_constant_limit(first, limit_set);
        verdict.evidence.reason = Some(format!(
            "the limit set collapses to a finite set under: {} \
             (an empty set means every panel member diverged)",
            names.join(", ")
        ));
        return Ok(verdict);
    }
    if any_inconclusive_attack {
        return Ok(Verdict::undecided(
            "no attack collapsed the limit set, but some trajectories were undecided",
        ));
    }
    let mut verdict = Verdict::not_broken(
        "limits remain data-dependent: every resolved attack produced as many \
         limit clusters as panel members",
    );
    verdict.evidence.limit_set = Some(
        resolved_cluster_pool
            .iter()
            .map(|c| c.representative.clone())
            .collect(),
    );
    Ok(verdict)
}

/// Which breakdown definition a search runs under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DefinitionKind {
    Def1,
    Def2,
    Def3,
    Def4,
    GentonLucas,
}

impl DefinitionKind {
    pub fn name(self) -> &'static str {
        match self {
            DefinitionKind::Def1 => "def1",
            DefinitionKind::Def2 => "def2",
            DefinitionKind::Def3 => "def3",
            DefinitionKind::Def4 => "def4",
            DefinitionKind::GentonLucas => "genton-lucas",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "def1" => Ok(DefinitionKind::Def1),
            "def2" => Ok(DefinitionKind::Def2),
            "def3" => Ok(DefinitionKind::Def3),
            "def4" => Ok(DefinitionKind::Def4),
            "genton-lucas" => Ok(DefinitionKind::GentonLucas),
            other => Err(Error::InvalidConfig(format!(
                "unknown definition `{other}`"
            ))),
        }
    }
}

/// What the breakdown search runs against: definitions 1–2 interrogate one
/// sample, definitions 3 and the limit-set criterion need a panel.
#[derive(Debug, Clone, PartialEq)]
pub enum BreakdownTarget {
    Single(Sample),
    Panel(Vec<Sample>),
}

impl BreakdownTarget {
    fn representative(&self) -> &Sample {
        match self {
            BreakdownTarget::Single(x) => x,
            BreakdownTarget::Panel(panel) => &panel[0],
        }
    }
}

/// A mask-free attack description, instantiated per outlier count by masking
/// the first `s` positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackTemplate {
    pub kind: AttackKind,
    pub c0: f64,
    pub gamma: f64,
    pub steps: usize,
    pub direction: Direction,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub target: Option<f64>,
}

impl AttackTemplate {
    pub fn with_defaults(kind: AttackKind, direction: Direction) -> Self {
        AttackTemplate {
            kind,
            c0: DEFAULT_C0,
            gamma: DEFAULT_GAMMA,
            steps: DEFAULT_STEPS,
            direction,
            target: None,
        }
    }

    pub fn instantiate(&self, n: usize, s: usize) -> Result<AttackSpec> {
        let mask = ContaminationMask::first(n, s)?;
        let mut spec = AttackSpec::new(
            self.kind,
            mask,
            self.c0,
            self.gamma,
            self.steps,
            self.direction,
        )?;
        if let Some(target) = self.target {
            spec = spec.with_target(target)?;
        }
        Ok(spec)
    }
}

/// Where the per-`s` attack batteries come from.
#[derive(Debug, Clone, PartialEq)]
pub enum AttackCatalog {
    /// `build_equivariant_attack` per outlier count.
    Canonical,
    /// Caller-supplied templates (required for estimators with no
    /// equivariance tag).
    Custom(Vec<AttackTemplate>),
}

/// Verdict for one outlier count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerOutlierVerdict {
    pub s: usize,
    pub fraction: f64,
    pub verdict: Verdict,
}

/// Result of the breakdown-point sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakdownPointResult {
    pub definition: DefinitionKind,
    pub n: usize,
    pub per_s: Vec<PerOutlierVerdict>,
    /// Smallest breaking outlier count; `None` when no `s <= n` breaks.
    pub smallest_breaking: Option<usize>,
    /// `smallest_breaking / n`.
    pub fraction: Option<f64>,
}

/// Sweep `s = 1..=n`, attack with the catalog's battery at each count, and
/// report the smallest breaking fraction under the chosen definition.
///
/// Attacks that cannot be materialized inside the sample space (for
/// example, a downward shift on a nonnegative sample) are skipped — the
/// adversary is confined to the sample space, so such an attack does not
/// exist there. Definition 4 is evaluated by the reachable-set oracle, not
/// by trajectory detectors.
pub fn breakdown_point(
    est: &Estimator,
    target: &BreakdownTarget,
    definition: DefinitionKind,
    catalog: &AttackCatalog,
    cfg: &DetectorConfig,
) -> Result<BreakdownPointResult> {
    match (definition, target) {
        (DefinitionKind::Def1 | DefinitionKind::Def2, BreakdownTarget::Panel(_)) => {
            return Err(Error::WrongTarget {
                definition: definition.name(),
                needs: "a single sample",
            })
        }
        (DefinitionKind::Def3 | DefinitionKind::GentonLucas, BreakdownTarget::Single(_)) => {
            return Err(Error::WrongTarget {
                definition: definition.name(),
                needs: "a panel of samples",
            })
        }
        (DefinitionKind::Def4, _) => {
            return Err(Error::InvalidConfig(
                "definition def4 concerns reachable sets; run the reachable-set \
                 detector instead of the trajectory sweep"
                    .into(),
            ))
        }
        _ => {}
    }
    if let BreakdownTarget::Panel(panel) = target {
        validate_panel(panel)?;
    }
    let representative = target.representative();
    let n = representative.len();
    let space = est.descriptor(representative.domain()).value_space;

    let mut per_s = Vec::with_capacity(n);
    let mut smallest_breaking = None;
    for s in 1..=n {
        let battery: Vec<AttackSpec> = match catalog {
            AttackCatalog::Canonical => build_equivariant_attack(est, representative, s)?,
            AttackCatalog::Custom(templates) => {
                if templates.is_empty() {
                    return Err(Error::CustomAttackNeedsSequence);
                }
                templates
                    .iter()
                    .map(|t| t.instantiate(n, s))
                    .collect::<Result<_>>()?
            }
        };
        let verdict = run_battery(est, target, definition, &battery, &space, cfg)?;
        if verdict.outcome.is_broken() && smallest_breaking.is_none() {
            smallest_breaking = Some(s);
        }
        per_s.push(PerOutlierVerdict {
            s,
            fraction: s as f64 / n as f64,
            verdict,
        });
    }
    Ok(BreakdownPointResult {
        definition,
        n,
        per_s,
        smallest_breaking,
        fraction: smallest_breaking.map(|s| s as f64 / n as f64),
    })
}

fn run_battery(
    est: &Estimator,
    target: &BreakdownTarget,
    definition: DefinitionKind,
    battery: &[AttackSpec],
    space: &ValueSpace,
    cfg: &DetectorConfig,
) -> Result<Verdict> {
    if definition == DefinitionKind::GentonLucas {
        let BreakdownTarget::Panel(panel) = target else {
            unreachable!("target compatibility was checked upfront");
        };
        return genton_lucas_limit_set(est, panel, battery, cfg);
    }
    let mut fallback: Option<Verdict> = None;
    let mut skipped = 0usize;
    for attack in battery {
        let outcome = match (definition, target) {
            (DefinitionKind::Def1, BreakdownTarget::Single(x)) => {
                detect_def1(est, x, attack, cfg)
            }
            (DefinitionKind::Def2, BreakdownTarget::Single(x)) => {
                detect_def2(est, x, attack, space, cfg)
            }
            (DefinitionKind::Def3, BreakdownTarget::Panel(panel)) => {
                detect_def3(est, panel, attack, cfg)
            }
            _ => unreachable!("target compatibility was checked upfront"),
        };
        let verdict = match outcome {
            Ok(v) => v,
            // The attack left the sample space; it does not exist there.
            Err(Error::DomainViolation { .. }) => {
                skipped += 1;
                continue;
            }
            Err(other) => return Err(other),
        };
        if verdict.outcome.is_broken() {
            return Ok(verdict);
        }
        let replace = match &fallback {
            None => true,
            Some(current) => {
                current.outcome != crate::verdict::Outcome::Undecided
                    && verdict.outcome == crate::verdict::Outcome::Undecided
            }
        };
        if replace {
            fallback = Some(verdict);
        }
    }
    Ok(fallback.unwrap_or_else(|| {
        Verdict::undecided(format!(
            "no attack in the battery could be materialized inside the sample \
             space ({skipped} skipped)"
        ))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attacks::{point_mass_attack, shift_half_attack, single_outlier_escape};
    use crate::estimators::b1_outlier_limit;
    use approx::assert_relative_eq;

    fn scalar(values: &[f64]) -> Sample {
        Sample::scalar(values.to_vec()).unwrap()
    }

    fn shift_spec(n: usize, s: usize) -> AttackSpec {
        AttackSpec::new(
            AttackKind::ShiftHalf,
            ContaminationMask::first(n, s).unwrap(),
            DEFAULT_C0,
            DEFAULT_GAMMA,
            DEFAULT_STEPS,
            Direction::Forward,
        )
        .unwrap()
    }

    #[test]
    fn mean_trajectory_under_shift_matches_the_closed_form() {
        let x = scalar(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let seq = shift_half_attack(
            &x,
            ContaminationMask::first(5, 1).unwrap(),
            DEFAULT_C0,
            DEFAULT_GAMMA,
            DEFAULT_STEPS,
            Direction::Forward,
        )
        .unwrap();
        let traj = evaluate_trajectory(&Estimator::Mean, &seq);
        for (entry, &mag) in traj.entries.iter().zip(seq.magnitudes()) {
            let expected = 3.0 + mag / 5.0;
            assert_relative_eq!(
                entry.value.as_ref().unwrap().as_scalar().unwrap(),
                expected,
                max_relative = 1e-12
            );
        }
        let class = classify_limit(&traj, &DetectorConfig::default()).unwrap();
        assert_eq!(class.outcome, LimitOutcome::Diverged);
    }

    // b1 approaches its limit like O(1/magnitude), so the tail needs to run
    // past the default six decades before the deltas drop below eps_conv.
    const B1_STEPS: usize = 9;

    #[test]
    fn b1_trajectory_converges_to_the_outlier_limit() {
        let x = scalar(&[0.3, 1.7, 2.2, 3.1, 4.9, 5.3, 6.8, 7.1, 8.4, 2.5]);
        let seq = single_outlier_escape(&x, 9, DEFAULT_C0, DEFAULT_GAMMA, B1_STEPS).unwrap();
        let traj = evaluate_trajectory(&Estimator::SkewnessB1, &seq);
        let class = classify_limit(&traj, &DetectorConfig::default()).unwrap();
        assert_eq!(class.outcome, LimitOutcome::Converged);
        assert_relative_eq!(
            class.t0.unwrap().as_scalar().unwrap(),
            b1_outlier_limit(10).unwrap(),
            max_relative = 1e-3
        );
    }

    #[test]
    fn constant_trajectories_converge() {
        let x = scalar(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let seq = point_mass_attack(&x, ContaminationMask::first(5, 3).unwrap(), 3.0).unwrap();
        let traj = evaluate_trajectory(&Estimator::Mad, &seq);
        let class = classify_limit(&traj, &DetectorConfig::default()).unwrap();
        assert_eq!(class.outcome, LimitOutcome::Converged);
        assert_eq!(class.t0.unwrap().as_scalar().unwrap(), 0.0);
    }

    #[test]
    fn classify_needs_enough_valid_entries() {
        let x = scalar(&[1.0, 1.0, 2.0]);
        // Point mass on all three positions makes the sample constant, so b1
        // fails at every step.
        let seq = point_mass_attack(&x, ContaminationMask::first(3, 3).unwrap(), 5.0).unwrap();
        let traj = evaluate_trajectory(&Estimator::SkewnessB1, &seq);
        assert!(traj.entries.iter().all(|e| e.failure.is_some()));
        assert!(matches!(
            classify_limit(&traj, &DetectorConfig::default()),
            Err(Error::TooFewValidEntries { .. })
        ));
    }

    #[test]
    fn def1_examples() {
        let cfg = DetectorConfig::default();
        let x = scalar(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let broken = detect_def1(&Estimator::Mean, &x, &shift_spec(5, 1), &cfg).unwrap();
        assert!(broken.outcome.is_broken());

        // One shifted point cannot drag the median out of the data hull.
        let held = detect_def1(&Estimator::Median, &x, &shift_spec(5, 1), &cfg).unwrap();
        assert_eq!(held.outcome, crate::verdict::Outcome::NotBroken);

        let constant = Estimator::constant(7.0).unwrap();
        let fixed = detect_def1(&constant, &x, &shift_spec(5, 5), &cfg).unwrap();
        assert_eq!(fixed.outcome, crate::verdict::Outcome::NotBroken);
    }

    #[test]
    fn def2_implosion_and_divergence() {
        let cfg = DetectorConfig::default();
        let x = scalar(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let spec = AttackSpec::new(
            AttackKind::PointMass,
            ContaminationMask::first(5, 3).unwrap(),
            DEFAULT_C0,
            DEFAULT_GAMMA,
            DEFAULT_STEPS,
            Direction::Forward,
        )
        .unwrap();
        let space = ValueSpace::half_line(0.0).unwrap();
        let imploded = detect_def2(&Estimator::Mad, &x, &spec, &space, &cfg).unwrap();
        assert_eq!(imploded.outcome, crate::verdict::Outcome::BrokenBoundary);
        assert_eq!(imploded.evidence.limit, Some(vec![0.0]));

        let escape = AttackSpec::new(
            AttackKind::SingleOutlierEscape,
            ContaminationMask::first(5, 1).unwrap(),
            DEFAULT_C0,
            DEFAULT_GAMMA,
            DEFAULT_STEPS,
            Direction::Forward,
        )
        .unwrap();
        let exploded = detect_def2(&Estimator::StdDev, &x, &escape, &space, &cfg).unwrap();
        assert_eq!(exploded.outcome, crate::verdict::Outcome::BrokenDivergence);
    }

    #[test]
    fn def2_breaks_the_constant_estimator_where_def1_cannot() {
        let cfg = DetectorConfig::default();
        let x = scalar(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let constant = Estimator::constant(7.0).unwrap();
        let space = ValueSpace::singleton(vec![7.0]).unwrap();
        for s in 1..=5 {
            let verdict =
                detect_def2(&constant, &x, &shift_spec(5, s), &space, &cfg).unwrap();
            assert_eq!(verdict.outcome, crate::verdict::Outcome::BrokenBoundary);
        }
    }

    fn small_panel() -> Vec<Sample> {
        vec![
            scalar(&[0.1, 1.2, 2.3, 3.4, 4.5, 5.6, 6.7, 7.8, 8.9, 9.1]),
            scalar(&[-1.0, 0.5, 1.5, 2.5, 3.5, 4.5, 5.5, 6.5, 7.5, 8.5]),
            scalar(&[2.0, 2.2, 2.9, 3.7, 4.1, 4.9, 5.3, 6.2, 7.7, 8.8]),
            scalar(&[-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.5]),
            scalar(&[0.0, 0.7, 1.9, 2.8, 3.3, 4.4, 5.9, 6.1, 7.2, 9.9]),
        ]
    }

    #[test]
    fn def3_finds_the_b1_constant_limit() {
        let cfg = DetectorConfig::default();
        let spec = AttackSpec::new(
            AttackKind::SingleOutlierEscape,
            ContaminationMask::first(10, 1).unwrap(),
            DEFAULT_C0,
            DEFAULT_GAMMA,
            B1_STEPS,
            Direction::Forward,
        )
        .unwrap();
        let verdict = detect_def3(&Estimator::SkewnessB1, &small_panel(), &spec, &cfg).unwrap();
        assert_eq!(
            verdict.outcome,
            crate::verdict::Outcome::BrokenConstantLimit
        );
        let limit = verdict.evidence.limit.unwrap();
        assert_relative_eq!(limit[0], 64.0 / 9.0, max_relative = 1e-3);
    }

    #[test]
    fn def3_rejects_data_dependent_limits() {
        let cfg = DetectorConfig::default();
        let panel: Vec<Sample> = small_panel()
            .iter()
            .map(|s| scalar(&s.values().unwrap()[..5]))
            .collect();
        let verdict =
            detect_def3(&Estimator::Median, &panel, &shift_spec(5, 1), &cfg).unwrap();
        assert_eq!(verdict.outcome, crate::verdict::Outcome::NotBroken);
    }

    #[test]
    fn limit_set_collapses_for_b1_and_not_for_the_median() {
        let cfg = DetectorConfig::default();
        let panel = small_panel();
        let escape = AttackSpec::new(
            AttackKind::SingleOutlierEscape,
            ContaminationMask::first(10, 1).unwrap(),
            DEFAULT_C0,
            DEFAULT_GAMMA,
            B1_STEPS,
            Direction::Forward,
        )
        .unwrap();
        let collapsed =
            genton_lucas_limit_set(&Estimator::SkewnessB1, &panel, &[escape], &cfg).unwrap();
        assert!(collapsed.outcome.is_broken());
        assert_eq!(collapsed.evidence.limit_set.as_ref().unwrap().len(), 1);

        let spread =
            genton_lucas_limit_set(&Estimator::Median, &panel, &[shift_spec(10, 1)], &cfg)
                .unwrap();
        assert_eq!(spread.outcome, crate::verdict::Outcome::NotBroken);
    }

    #[test]
    fn limit_set_empty_collapse_under_full_divergence() {
        let cfg = DetectorConfig::default();
        let panel: Vec<Sample> = small_panel()
            .iter()
            .map(|s| scalar(&s.values().unwrap()[..5]))
            .collect();
        let verdict =
            genton_lucas_limit_set(&Estimator::Mean, &panel, &[shift_spec(5, 1)], &cfg).unwrap();
        assert!(verdict.outcome.is_broken());
        assert_eq!(verdict.evidence.limit_set, Some(Vec::new()));
    }

    #[test]
    fn breakdown_point_of_the_mean_is_one_outlier() {
        let cfg = DetectorConfig::default();
        let x = scalar(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let result = breakdown_point(
            &Estimator::Mean,
            &BreakdownTarget::Single(x),
            DefinitionKind::Def1,
            &AttackCatalog::Canonical,
            &cfg,
        )
        .unwrap();
        assert_eq!(result.smallest_breaking, Some(1));
        assert_eq!(result.fraction, Some(0.2));
    }

    #[test]
    fn breakdown_point_of_the_median_is_the_half_count() {
        let cfg = DetectorConfig::default();
        for k in [2usize, 3, 4] {
            let n = 2 * k - 1;
            let values: Vec<f64> = (1..=n).map(|v| v as f64).collect();
            let result = breakdown_point(
                &Estimator::Median,
                &BreakdownTarget::Single(scalar(&values)),
                DefinitionKind::Def1,
                &AttackCatalog::Canonical,
                &cfg,
            )
            .unwrap();
            assert_eq!(result.smallest_breaking, Some(k), "n = {n}");
            // Every verdict below k is a clean not-broken.
            for per in &result.per_s[..k - 1] {
                assert_eq!(per.verdict.outcome, crate::verdict::Outcome::NotBroken);
            }
        }
    }

    #[test]
    fn constant_estimator_breaks_only_under_definition_two() {
        let cfg = DetectorConfig::default();
        let x = scalar(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let constant = Estimator::constant(7.0).unwrap();
        let catalog = AttackCatalog::Custom(vec![AttackTemplate::with_defaults(
            AttackKind::ShiftHalf,
            Direction::Forward,
        )]);
        let def1 = breakdown_point(
            &constant,
            &BreakdownTarget::Single(x.clone()),
            DefinitionKind::Def1,
            &catalog,
            &cfg,
        )
        .unwrap();
        assert_eq!(def1.smallest_breaking, None);
        let def2 = breakdown_point(
            &constant,
            &BreakdownTarget::Single(x),
            DefinitionKind::Def2,
            &catalog,
            &cfg,
        )
        .unwrap();
        assert_eq!(def2.smallest_breaking, Some(1));
    }

    #[test]
    fn breakdown_point_requires_the_right_target_shape() {
        let cfg = DetectorConfig::default();
        let x = scalar(&[1.0, 2.0, 3.0]);
        assert!(matches!(
            breakdown_point(
                &Estimator::Mean,
                &BreakdownTarget::Single(x),
                DefinitionKind::Def3,
                &AttackCatalog::Canonical,
                &cfg,
            ),
            Err(Error::WrongTarget { .. })
        ));
    }
}
