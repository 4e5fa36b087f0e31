//! Contamination attack construction.
//!
//! An attack is a parameterized family of outlier configurations `Y_m`,
//! `m = 1..M`, with magnitude `c0 * gamma^m` growing geometrically — the
//! numerical surrogate for "the contamination goes to infinity". Each step
//! materializes as `contaminate(X, Y_m, S)` for the attack's mask `S`, so a
//! sequence never touches more than `s` positions of the clean sample.
//!
//! Four generators are provided, one per equivariance tag, plus a builder
//! that picks the canonical battery for an estimator:
//!
//! * `shift-half`: add `±c0*gamma^m` to the masked values (location attack);
//! * `scale-half-x`: multiply masked covariates by `(c0*gamma^m)^±1`
//!   (regression attack);
//! * `point-mass`: park every masked value on one target (implosion attack);
//! * `single-outlier-escape`: send the masked values themselves to
//!   `±c0*gamma^m` (invariant-statistic attack).
//!
//! Magnitudes are capped at `1e12` so samples stay finite; a capped sequence
//! is flagged and downstream detectors report `undecided` rather than trust
//! a saturated tail.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::estimators::{Estimator, EquivarianceTag};
use crate::sample::{contaminate, ContaminationMask, Domain, Observation, Sample};

/// Default base magnitude: first step lands at `c0 * gamma = 1e4`.
pub const DEFAULT_C0: f64 = 1e3;
/// Default geometric growth factor.
pub const DEFAULT_GAMMA: f64 = 10.0;
/// Default number of steps; magnitudes run `1e4..1e9`.
pub const DEFAULT_STEPS: usize = 6;
/// Hard ceiling on contamination magnitude; beyond this the sequence is
/// marked saturated instead of growing further.
pub const MAGNITUDE_CAP: f64 = 1e12;

/// Attack family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackKind {
    ShiftHalf,
    ScaleHalfX,
    PointMass,
    SingleOutlierEscape,
    /// Placeholder for caller-supplied sequences; cannot be materialized
    /// from a spec alone.
    Custom,
}

impl AttackKind {
    pub fn name(self) -> &'static str {
        match self {
            AttackKind::ShiftHalf => "shift-half",
            AttackKind::ScaleHalfX => "scale-half-x",
            AttackKind::PointMass => "point-mass",
            AttackKind::SingleOutlierEscape => "single-outlier-escape",
            AttackKind::Custom => "custom",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "shift-half" => Ok(AttackKind::ShiftHalf),
            "scale-half-x" => Ok(AttackKind::ScaleHalfX),
            "point-mass" => Ok(AttackKind::PointMass),
            "single-outlier-escape" => Ok(AttackKind::SingleOutlierEscape),
            "custom" => Ok(AttackKind::Custom),
            other => Err(Error::InvalidAttack(format!("unknown attack kind `{other}`"))),
        }
    }
}

/// Whether the transformation or its inverse is applied (`g` vs `g^{-1}`):
/// forward shifts up / scales up, inverse shifts down / scales down.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Inverse => -1.0,
        }
    }

    pub fn from_sign(sign: i8) -> Result<Self> {
        match sign {
            1 => Ok(Direction::Forward),
            -1 => Ok(Direction::Inverse),
            other => Err(Error::InvalidAttack(format!(
                "direction must be +1 or -1, got {other}"
            ))),
        }
    }
}

impl Serialize for Direction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_i8(match self {
            Direction::Forward => 1,
            Direction::Inverse => -1,
        })
    }
}

impl<'de> Deserialize<'de> for Direction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let sign = i8::deserialize(deserializer)?;
        Direction::from_sign(sign).map_err(serde::de::Error::custom)
    }
}

/// Full description of a contamination attack, sufficient to regenerate the
/// sequence against any sample of matching length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub kind: AttackKind,
    pub mask: ContaminationMask,
    pub c0: f64,
    pub gamma: f64,
    pub steps: usize,
    pub direction: Direction,
    /// Point-mass target; `None` means "the median of the attacked sample",
    /// resolved at materialization time.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub target: Option<f64>,
}

impl AttackSpec {
    pub fn new(
        kind: AttackKind,
        mask: ContaminationMask,
        c0: f64,
        gamma: f64,
        steps: usize,
        direction: Direction,
    ) -> Result<Self> {
        let spec = AttackSpec {
            kind,
            mask,
            c0,
            gamma,
            steps,
            direction,
            target: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_target(mut self, target: f64) -> Result<Self> {
        if !target.is_finite() {
            return Err(Error::InvalidAttack(format!(
                "point-mass target must be finite, got {target}"
            )));
        }
        self.target = Some(target);
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::InvalidAttack(format!(
                "an attack needs at least 2 steps, got {}",
                self.steps
            )));
        }
        if self.gamma <= 1.0 || !self.gamma.is_finite() {
            return Err(Error::InvalidAttack(format!(
                "growth factor must be finite and > 1, got {}",
                self.gamma
            )));
        }
        if !self.c0.is_finite() || self.c0 < 0.0 {
            return Err(Error::InvalidAttack(format!(
                "base magnitude must be finite and >= 0, got {}",
                self.c0
            )));
        }
        // Multiplicative attacks cannot tolerate a zero magnitude.
        if self.kind == AttackKind::ScaleHalfX && self.c0 == 0.0 {
            return Err(Error::InvalidAttack(
                "scale-half-x needs a strictly positive base magnitude".into(),
            ));
        }
        if self.kind != AttackKind::Custom && self.mask.count() == 0 {
            return Err(Error::EmptyMask);
        }
        Ok(())
    }

    /// Number of contaminated positions.
    pub fn outliers(&self) -> usize {
        self.mask.count()
    }

    /// The magnitude schedule `c0 * gamma^m` for `m = 1..=steps`, capped at
    /// [`MAGNITUDE_CAP`]. The second element of the pair is the index of the
    /// first capped step, if any.
    pub fn magnitudes(&self) -> (Vec<f64>, Option<usize>) {
        let mut magnitudes = Vec::with_capacity(self.steps);
        let mut saturated_from = None;
        for m in 1..=self.steps {
            let raw = self.c0 * self.gamma.powi(m as i32);
            if raw > MAGNITUDE_CAP {
                if saturated_from.is_none() {
                    saturated_from = Some(m - 1);
                }
                magnitudes.push(MAGNITUDE_CAP);
            } else {
                magnitudes.push(raw);
            }
        }
        (magnitudes, saturated_from)
    }

    /// Generate the contamination sequence against `x`. Every element is
    /// `contaminate(x, y_m, mask)`, with `y_m` built from the attack kind.
    pub fn materialize(&self, x: &Sample) -> Result<AttackSequence> {
        if self.mask.len() != x.len() {
            return Err(Error::LengthMismatch {
                left: self.mask.len(),
                right: x.len(),
            });
        }
        let (magnitudes, saturated_from) = self.magnitudes();
        let samples = match self.kind {
            AttackKind::ShiftHalf => {
                let values = self.require_scalar(x)?;
                magnitudes
                    .iter()
                    .map(|&mag| {
                        let shift = self.direction.sign() * mag;
                        self.contaminate_scalar(x, values, |v| v + shift)
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            AttackKind::SingleOutlierEscape => {
                let values = self.require_scalar(x)?;
                magnitudes
                    .iter()
                    .map(|&mag| {
                        let outlier = self.direction.sign() * mag;
                        self.contaminate_scalar(x, values, |_| outlier)
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            AttackKind::PointMass => {
                let values = self.require_scalar(x)?;
                let target = match self.target {
                    Some(t) => t,
                    None => Estimator::Median.eval_scalar(values)?,
                };
                let fixed = self.contaminate_scalar(x, values, |_| target)?;
                vec![fixed; self.steps]
            }
            AttackKind::ScaleHalfX => {
                let pairs = x.pairs().ok_or_else(|| Error::IncompatibleAttack {
                    kind: self.kind.name().to_string(),
                    arity: "scalar",
                })?;
                magnitudes
                    .iter()
                    .map(|&mag| {
                        let factor = match self.direction {
                            Direction::Forward => mag,
                            Direction::Inverse => 1.0 / mag,
                        };
                        let y: Vec<Observation> = pairs
                            .iter()
                            .map(|&(px, py)| Observation::Pair { x: factor * px, y: py })
                            .collect();
                        let y = Sample::from_observations(&y, Domain::Regression)?;
                        contaminate(x, &y, &self.mask)
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            AttackKind::Custom => return Err(Error::CustomAttackNeedsSequence),
        };
        Ok(AttackSequence {
            spec: self.clone(),
            base: x.clone(),
            magnitudes,
            samples,
            saturated_from,
        })
    }

    fn require_scalar<'a>(&self, x: &'a Sample) -> Result<&'a [f64]> {
        x.values().ok_or_else(|| Error::IncompatibleAttack {
            kind: self.kind.name().to_string(),
            arity: "regression",
        })
    }

    fn contaminate_scalar(
        &self,
        x: &Sample,
        values: &[f64],
        outlier: impl Fn(f64) -> f64,
    ) -> Result<Sample> {
        let y: Vec<Observation> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                // Unmasked positions of Y are irrelevant to the construction;
                // copying the clean value keeps Y inside the sample space.
                let w = if self.mask.is_flagged(i) { outlier(v) } else { v };
                Observation::Scalar(w)
            })
            .collect();
        let y = Sample::from_observations(&y, x.domain())?;
        contaminate(x, &y, &self.mask)
    }
}

/// A materialized attack: the clean sample, the contaminated sample at each
/// step, and the schedule that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackSequence {
    spec: AttackSpec,
    base: Sample,
    magnitudes: Vec<f64>,
    samples: Vec<Sample>,
    saturated_from: Option<usize>,
}

impl AttackSequence {
    pub fn spec(&self) -> &AttackSpec {
        &self.spec
    }

    pub fn base(&self) -> &Sample {
        &self.base
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Index of the first step whose magnitude hit [`MAGNITUDE_CAP`].
    pub fn saturated_from(&self) -> Option<usize> {
        self.saturated_from
    }
}

/// Shift the masked values by `direction * c0 * gamma^m`.
pub fn shift_half_attack(
    x: &Sample,
    mask: ContaminationMask,
    c0: f64,
    gamma: f64,
    steps: usize,
    direction: Direction,
) -> Result<AttackSequence> {
    AttackSpec::new(AttackKind::ShiftHalf, mask, c0, gamma, steps, direction)?.materialize(x)
}

/// Multiply the masked covariates by `(c0 * gamma^m)^{±1}`.
pub fn scale_half_x_attack(
    x: &Sample,
    mask: ContaminationMask,
    c0: f64,
    gamma: f64,
    steps: usize,
    direction: Direction,
) -> Result<AttackSequence> {
    AttackSpec::new(AttackKind::ScaleHalfX, mask, c0, gamma, steps, direction)?.materialize(x)
}

/// Park the masked values on `target` for every step (a constant sequence of
/// [`DEFAULT_STEPS`] copies).
pub fn point_mass_attack(
    x: &Sample,
    mask: ContaminationMask,
    target: f64,
) -> Result<AttackSequence> {
    AttackSpec::new(
        AttackKind::PointMass,
        mask,
        DEFAULT_C0,
        DEFAULT_GAMMA,
        DEFAULT_STEPS,
        Direction::Forward,
    )?
    .with_target(target)?
    .materialize(x)
}

/// Send one observation to `c0 * gamma^m`.
pub fn single_outlier_escape(
    x: &Sample,
    position: usize,
    c0: f64,
    gamma: f64,
    steps: usize,
) -> Result<AttackSequence> {
    let mask = ContaminationMask::from_positions(x.len(), &[position])?;
    AttackSpec::new(
        AttackKind::SingleOutlierEscape,
        mask,
        c0,
        gamma,
        steps,
        Direction::Forward,
    )?
    .materialize(x)
}

/// Canonical attack battery for an estimator, keyed off its equivariance
/// tag, with the default schedule and the first `s` positions masked:
///
/// * translation-equivariant: shift-half in both directions;
/// * scale-equivariant: point-mass at the sample median (implosion) plus a
///   single-outlier escape (explosion);
/// * affine-invariant: single-outlier escape;
/// * x-scale-inverse-equivariant: scale-half-x in both directions.
///
/// Estimators with no tag have no canonical attack; callers must supply a
/// custom battery.
pub fn build_equivariant_attack(
    est: &Estimator,
    x: &Sample,
    s: usize,
) -> Result<Vec<AttackSpec>> {
    if s == 0 {
        return Err(Error::EmptyMask);
    }
    if s > x.len() {
        return Err(Error::TooManyOutliers { s, n: x.len() });
    }
    let mask = ContaminationMask::first(x.len(), s)?;
    let tag = *est
        .tags()
        .first()
        .ok_or_else(|| Error::NoCanonicalAttack(est.name()))?;
    let spec = |kind, direction| {
        AttackSpec::new(
            kind,
            mask.clone(),
            DEFAULT_C0,
            DEFAULT_GAMMA,
            DEFAULT_STEPS,
            direction,
        )
    };
    match tag {
        EquivarianceTag::TranslationEquivariant => Ok(vec![
            spec(AttackKind::ShiftHalf, Direction::Forward)?,
            spec(AttackKind::ShiftHalf, Direction::Inverse)?,
        ]),
        EquivarianceTag::ScaleEquivariant => Ok(vec![
            spec(AttackKind::PointMass, Direction::Forward)?,
            spec(AttackKind::SingleOutlierEscape, Direction::Forward)?,
        ]),
        EquivarianceTag::AffineInvariant => {
            Ok(vec![spec(AttackKind::SingleOutlierEscape, Direction::Forward)?])
        }
        EquivarianceTag::XScaleInverseEquivariant => Ok(vec![
            spec(AttackKind::ScaleHalfX, Direction::Forward)?,
            spec(AttackKind::ScaleHalfX, Direction::Inverse)?,
        ]),
    }
}
