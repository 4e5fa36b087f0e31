//! Group actions on samples and checkers for equivariance identities.
//!
//! Four concrete actions are supported: translation, scaling, and general
//! affine maps on scalar samples, plus covariate scaling on regression
//! samples. Each estimator tag corresponds to an identity relating the
//! estimate of a transformed sample to the transformed estimate; the
//! checkers here evaluate both sides numerically and report the worst
//! discrepancy.
//!
//! Two named identities get dedicated checkers because they are the seeds of
//! the contamination attacks:
//!
//! * the *translation-half* identity for even `n = 2k`:
//!   `T(x_1 + c, ..., x_k + c, x_{k+1}, ..., x_n)
//!    - T(x_1, ..., x_k, x_{k+1} - c, ..., x_n - c) = c`;
//! * the *covariate-scaling* identity for regression fits on even `n = 2k`:
//!   scaling the first half of the covariates by `c` produces `1/c` times
//!   the slope obtained by scaling the second half by `1/c`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{Estimator, EquivarianceTag};
use crate::sample::{Observation, Sample};

/// A group action on samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GroupAction {
    /// `x -> x + shift` on scalar samples.
    Translate { shift: f64 },
    /// `x -> factor * x` on scalar samples, `factor != 0`.
    Scale { factor: f64 },
    /// `x -> factor * x + shift` on scalar samples, `factor != 0`.
    Affine { factor: f64, shift: f64 },
    /// `(x, y) -> (factor * x, y)` on regression samples, `factor != 0`.
    XScale { factor: f64 },
}

impl GroupAction {
    pub fn translate(shift: f64) -> Result<Self> {
        if !shift.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "translation shift must be finite, got {shift}"
            )));
        }
        Ok(GroupAction::Translate { shift })
    }

    pub fn scale(factor: f64) -> Result<Self> {
        validate_factor(factor)?;
        Ok(GroupAction::Scale { factor })
    }

    pub fn affine(factor: f64, shift: f64) -> Result<Self> {
        validate_factor(factor)?;
        if !shift.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "affine shift must be finite, got {shift}"
            )));
        }
        Ok(GroupAction::Affine { factor, shift })
    }

    pub fn x_scale(factor: f64) -> Result<Self> {
        validate_factor(factor)?;
        Ok(GroupAction::XScale { factor })
    }

    /// True when the action operates on scalar samples.
    pub fn is_scalar_action(&self) -> bool {
        !matches!(self, GroupAction::XScale { .. })
    }

    /// Coefficients `(a, b)` of the induced map `x -> a*x + b`, when the
    /// action is a scalar affine map.
    pub fn affine_coefficients(&self) -> Option<(f64, f64)> {
        match *self {
            GroupAction::Translate { shift } => Some((1.0, shift)),
            GroupAction::Scale { factor } => Some((factor, 0.0)),
            GroupAction::Affine { factor, shift } => Some((factor, shift)),
            GroupAction::XScale { .. } => None,
        }
    }

    /// Apply the action elementwise. The transformed sample keeps the
    /// original domain tag and is revalidated against it, so an action that
    /// pushes a nonnegative sample below zero is an error rather than a
    /// silently retagged sample.
    pub fn apply(&self, sample: &Sample) -> Result<Sample> {
        match self {
            GroupAction::XScale { factor } => {
                let pairs = sample
                    .pairs()
                    .ok_or_else(|| Error::IncompatibleAction {
                        action: self.describe(),
                        arity: "scalar",
                    })?
                    .iter()
                    .map(|&(x, y)| (factor * x, y))
                    .collect();
                Sample::regression(pairs)
            }
            _ => {
                let (a, b) = self
                    .affine_coefficients()
                    .expect("scalar actions always have affine coefficients");
                let values = sample.values().ok_or_else(|| Error::IncompatibleAction {
                    action: self.describe(),
                    arity: "regression",
                })?;
                let transformed: Vec<Observation> = values
                    .iter()
                    .map(|&v| Observation::Scalar(a * v + b))
                    .collect();
                Sample::from_observations(&transformed, sample.domain())
            }
        }
    }

    /// The inverse action; applying it after `apply` restores the sample.
    pub fn invert(&self) -> GroupAction {
        match *self {
            GroupAction::Translate { shift } => GroupAction::Translate { shift: -shift },
            GroupAction::Scale { factor } => GroupAction::Scale {
                factor: 1.0 / factor,
            },
            GroupAction::Affine { factor, shift } => GroupAction::Affine {
                factor: 1.0 / factor,
                shift: -shift / factor,
            },
            GroupAction::XScale { factor } => GroupAction::XScale {
                factor: 1.0 / factor,
            },
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            GroupAction::Translate { shift } => format!("translate({shift})"),
            GroupAction::Scale { factor } => format!("scale({factor})"),
            GroupAction::Affine { factor, shift } => format!("affine({factor}, {shift})"),
            GroupAction::XScale { factor } => format!("x-scale({factor})"),
        }
    }
}

fn validate_factor(factor: f64) -> Result<()> {
    if !factor.is_finite() || factor == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "scale factor must be finite and nonzero, got {factor}"
        )));
    }
    Ok(())
}

/// Outcome of checking one identity over a set of trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub identity: String,
    pub trials: usize,
    /// Worst discrepancy over all trials; the unit (absolute vs. relative)
    /// is fixed by the checker that produced the report.
    pub max_discrepancy: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityReport {
    fn new(identity: String, discrepancies: &[f64], tolerance: f64) -> Self {
        let max_discrepancy = discrepancies.iter().copied().fold(0.0_f64, f64::max);
        IdentityReport {
            identity,
            trials: discrepancies.len(),
            max_discrepancy,
            tolerance,
            pass: max_discrepancy <= tolerance,
        }
    }
}

/// Relative tolerance for the tag identities.
pub const TAG_TOLERANCE: f64 = 1e-9;
/// Relative tolerance for the covariate-scaling identity; looser than the
/// tag tolerance because both sides involve differently conditioned fits.
pub const GLM_TOLERANCE: f64 = 1e-6;

/// Check the defining identity of `tag` for `est` on `x` over the given
/// actions. Discrepancies are relative: `|lhs - rhs| / max(1, |rhs|)`.
///
/// * translation-equivariant: `T(aX + b) = a*T(X) + b`;
/// * scale-equivariant: `T(aX + b) = |a|*T(X)`;
/// * affine-invariant: `T(aX + b) = T(X)`;
/// * x-scale-inverse-equivariant: the slope of the scaled design equals the
///   original slope divided by the factor (compared on the slope component).
pub fn check_equivariance_tag(
    est: &Estimator,
    tag: EquivarianceTag,
    x: &Sample,
    actions: &[GroupAction],
) -> Result<IdentityReport> {
    let base = est.evaluate(x)?;
    let mut discrepancies = Vec::with_capacity(actions.len());
    for action in actions {
        let transformed = action.apply(x)?;
        let moved = est.evaluate(&transformed)?;
        let (lhs, rhs): (Vec<f64>, Vec<f64>) = match tag {
            EquivarianceTag::TranslationEquivariant => {
                let (a, b) = scalar_coefficients(action)?;
                (
                    moved.components().to_vec(),
                    base.components().iter().map(|&t| a * t + b).collect(),
                )
            }
            EquivarianceTag::ScaleEquivariant => {
                let (a, _) = scalar_coefficients(action)?;
                (
                    moved.components().to_vec(),
                    base.components().iter().map(|&t| a.abs() * t).collect(),
                )
            }
            EquivarianceTag::AffineInvariant => {
                scalar_coefficients(action)?;
                (moved.components().to_vec(), base.components().to_vec())
            }
            EquivarianceTag::XScaleInverseEquivariant => {
                let factor = match action {
                    GroupAction::XScale { factor } => *factor,
                    _ => {
                        return Err(Error::InvalidAction(format!(
                            "the x-scale identity needs x-scale actions, got {}",
                            action.describe()
                        )))
                    }
                };
                // The identity constrains the slope, stored last.
                let slope_moved = *moved.components().last().expect("nonempty estimate");
                let slope_base = *base.components().last().expect("nonempty estimate");
                (vec![slope_moved], vec![slope_base / factor])
            }
        };
        let diff = lhs
            .iter()
            .zip(&rhs)
            .map(|(l, r)| (l - r) * (l - r))
            .sum::<f64>()
            .sqrt();
        let scale = rhs.iter().map(|r| r * r).sum::<f64>().sqrt().max(1.0);
        discrepancies.push(diff / scale);
    }
    Ok(IdentityReport::new(
        format!("{} under {}", tag.name(), est.name()),
        &discrepancies,
        TAG_TOLERANCE,
    ))
}

fn scalar_coefficients(action: &GroupAction) -> Result<(f64, f64)> {
    action.affine_coefficients().ok_or_else(|| {
        Error::InvalidAction(format!(
            "this identity needs scalar affine actions, got {}",
            action.describe()
        ))
    })
}

/// Check the translation-half identity on an even-length scalar sample:
/// shifting the first half up by `c` and shifting the second half down by
/// `c` produce estimates exactly `c` apart. The discrepancy is absolute and
/// the tolerance scales with the shift: `1e-9 * max(1, |c|)`.
pub fn check_translation_half_identity(
    est: &Estimator,
    x: &Sample,
    c: f64,
) -> Result<IdentityReport> {
    let values = x.values_or_err()?;
    let n = values.len();
    if n % 2 != 0 {
        return Err(Error::OddSampleLength(n));
    }
    let k = n / 2;
    let mut first_half_up = values.to_vec();
    for v in &mut first_half_up[..k] {
        *v += c;
    }
    let mut second_half_down = values.to_vec();
    for v in &mut second_half_down[k..] {
        *v -= c;
    }
    let left = est
        .evaluate(&Sample::scalar_with_domain(first_half_up, x.domain())?)?
        .as_scalar()
        .ok_or(Error::ExpectedScalarSample)?;
    let right = est
        .evaluate(&Sample::scalar_with_domain(second_half_down, x.domain())?)?
        .as_scalar()
        .ok_or(Error::ExpectedScalarSample)?;
    let discrepancy = (left - right - c).abs();
    Ok(IdentityReport::new(
        format!("translation-half under {} at c = {c}", est.name()),
        &[discrepancy],
        1e-9 * c.abs().max(1.0),
    ))
}

/// Check the covariate-scaling identity on an even-length regression sample:
/// the slope fitted after multiplying the first half of the covariates by
/// `c` equals `1/c` times the slope fitted after multiplying the second half
/// by `1/c`. The discrepancy is relative; tolerance `1e-6`.
pub fn check_glm_scaling_identity(
    est: &Estimator,
    x: &Sample,
    c: f64,
) -> Result<IdentityReport> {
    validate_factor(c)?;
    let pairs = x.pairs_or_err()?;
    let n = pairs.len();
    if n % 2 != 0 {
        return Err(Error::OddSampleLength(n));
    }
    let k = n / 2;
    let mut first_half_scaled = pairs.to_vec();
    for pair in &mut first_half_scaled[..k] {
        pair.0 *= c;
    }
    let mut second_half_inverse = pairs.to_vec();
    for pair in &mut second_half_inverse[k..] {
        pair.0 /= c;
    }
    let left_fit = est.evaluate(&Sample::regression(first_half_scaled)?)?;
    let right_fit = est.evaluate(&Sample::regression(second_half_inverse)?)?;
    let slope_left = *left_fit.components().last().expect("nonempty estimate");
    let slope_right = *right_fit.components().last().expect("nonempty estimate");
    let expected = slope_right / c;
    let discrepancy =
        (slope_left - expected).abs() / slope_left.abs().max(expected.abs()).max(1.0);
    Ok(IdentityReport::new(
        format!("covariate-scaling under {} at c = {c}", est.name()),
        &[discrepancy],
        GLM_TOLERANCE,
    ))
}
