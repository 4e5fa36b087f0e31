//! The estimator catalog.
//!
//! | name              | input      | value space  | equivariance tag          |
//! |-------------------|------------|--------------|---------------------------|
//! | `mean`            | scalar     | R (or [0,inf)) | translation-equivariant |
//! | `median`          | scalar     | R (or [0,inf)) | translation-equivariant |
//! | `trimmed_mean:a`  | scalar     | R (or [0,inf)) | translation-equivariant |
//! | `std_dev`         | scalar     | [0, inf)     | scale-equivariant          |
//! | `mad`             | scalar     | [0, inf)     | scale-equivariant          |
//! | `b1`              | scalar     | [0, inf)     | affine-invariant           |
//! | `b2`              | scalar     | [1, inf)     | affine-invariant           |
//! | `ols`             | regression | R^2          | x-scale-inverse-equivariant|
//! | `ols_slope`       | regression | R            | x-scale-inverse-equivariant|
//! | `constant:c`      | scalar     | {c}          | (none)                     |
//!
//! Conventions pinned here and relied on everywhere else:
//!
//! * central moments use the `1/n` normalization, not `1/(n-1)`;
//! * the even-`n` median is the midpoint of the two central order statistics;
//! * `trimmed_mean:a` removes `floor(n*a)` observations from each end;
//! * moment ratios (`std_dev`, `b1`, `b2`) are computed on centered values
//!   rescaled by the largest absolute deviation, so a single outlier of
//!   magnitude `1e8` or more cannot overflow or destroy precision. The scale
//!   factor cancels exactly in `b1` and `b2`.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::sample::{Domain, Sample};
use crate::space::ValueSpace;

/// Input arity of an estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Arity {
    Scalar,
    Regression,
}

/// Group-action identities an estimator satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquivarianceTag {
    /// Location identity: `T(aX + b) = a*T(X) + b` for all `a != 0`, `b`.
    TranslationEquivariant,
    /// Scale identity: `T(aX + b) = |a|*T(X)`.
    ScaleEquivariant,
    /// Invariance: `T(aX + b) = T(X)`.
    AffineInvariant,
    /// Regression slope identity: scaling all covariates by `c` divides the
    /// slope estimate by `c`.
    XScaleInverseEquivariant,
}

impl EquivarianceTag {
    pub fn name(self) -> &'static str {
        match self {
            EquivarianceTag::TranslationEquivariant => "translation-equivariant",
            EquivarianceTag::ScaleEquivariant => "scale-equivariant",
            EquivarianceTag::AffineInvariant => "affine-invariant",
            EquivarianceTag::XScaleInverseEquivariant => "x-scale-inverse-equivariant",
        }
    }
}

impl std::fmt::Display for EquivarianceTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Static description of an estimator: what it eats, where its values live,
/// and which group identities it satisfies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorDescriptor {
    pub name: String,
    pub arity: Arity,
    pub min_n: usize,
    pub value_space: ValueSpace,
    pub tags: Vec<EquivarianceTag>,
}

/// A finite estimate in `R^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateValue {
    components: Vec<f64>,
}

impl EstimateValue {
    fn new(components: Vec<f64>) -> Result<Self> {
        if components.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteResult);
        }
        Ok(EstimateValue { components })
    }

    pub fn scalar(value: f64) -> Result<Self> {
        Self::new(vec![value])
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    pub fn as_scalar(&self) -> Option<f64> {
        (self.components.len() == 1).then(|| self.components[0])
    }

    /// Euclidean norm of the estimate.
    pub fn norm(&self) -> f64 {
        self.components
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

/// An entry of the estimator catalog.
#[derive(Debug, Clone, PartialEq)]
pub enum Estimator {
    Mean,
    Median,
    TrimmedMean { alpha: f64 },
    StdDev,
    Mad,
    SkewnessB1,
    KurtosisB2,
    Ols,
    OlsSlope,
    Constant { value: f64 },
}

impl Estimator {
    /// Parse a catalog name such as `median`, `trimmed_mean:0.25`, or
    /// `constant:5`.
    pub fn parse(name: &str) -> Result<Self> {
        let name = name.trim();
        match name {
            "mean" => return Ok(Estimator::Mean),
            "median" => return Ok(Estimator::Median),
            "std_dev" => return Ok(Estimator::StdDev),
            "mad" => return Ok(Estimator::Mad),
            "b1" => return Ok(Estimator::SkewnessB1),
            "b2" => return Ok(Estimator::KurtosisB2),
            "ols" => return Ok(Estimator::Ols),
            "ols_slope" => return Ok(Estimator::OlsSlope),
            _ => {}
        }
        if let Some(rest) = name.strip_prefix("trimmed_mean:") {
            let alpha: f64 = rest
                .parse()
                .map_err(|_| Error::UnknownEstimator(name.to_string()))?;
            return Estimator::trimmed_mean(alpha);
        }
        if let Some(rest) = name.strip_prefix("constant:") {
            let value: f64 = rest
                .parse()
                .map_err(|_| Error::UnknownEstimator(name.to_string()))?;
            return Estimator::constant(value);
        }
        Err(Error::UnknownEstimator(name.to_string()))
    }

    pub fn trimmed_mean(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || !(0.0..0.5).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "trim fraction must lie in [0, 0.5), got {alpha}"
            )));
        }
        Ok(Estimator::TrimmedMean { alpha })
    }

    pub fn constant(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "constant estimator value must be finite, got {value}"
            )));
        }
        Ok(Estimator::Constant { value })
    }

    pub fn name(&self) -> String {
        match self {
            Estimator::Mean => "mean".into(),
            Estimator::Median => "median".into(),
            Estimator::TrimmedMean { alpha } => format!("trimmed_mean:{alpha}"),
            Estimator::StdDev => "std_dev".into(),
            Estimator::Mad => "mad".into(),
            Estimator::SkewnessB1 => "b1".into(),
            Estimator::KurtosisB2 => "b2".into(),
            Estimator::Ols => "ols".into(),
            Estimator::OlsSlope => "ols_slope".into(),
            Estimator::Constant { value } => format!("constant:{value}"),
        }
    }

    pub fn arity(&self) -> Arity {
        match self {
            Estimator::Ols | Estimator::OlsSlope => Arity::Regression,
            _ => Arity::Scalar,
        }
    }

    pub fn min_n(&self) -> usize {
        match self {
            Estimator::StdDev | Estimator::Ols | Estimator::OlsSlope => 2,
            Estimator::SkewnessB1 => 3,
            Estimator::KurtosisB2 => 4,
            _ => 1,
        }
    }

    pub fn output_dimension(&self) -> usize {
        match self {
            Estimator::Ols => 2,
            _ => 1,
        }
    }

    pub fn tags(&self) -> Vec<EquivarianceTag> {
        match self {
            Estimator::Mean | Estimator::Median | Estimator::TrimmedMean { .. } => {
                vec![EquivarianceTag::TranslationEquivariant]
            }
            Estimator::StdDev | Estimator::Mad => vec![EquivarianceTag::ScaleEquivariant],
            Estimator::SkewnessB1 | Estimator::KurtosisB2 => {
                vec![EquivarianceTag::AffineInvariant]
            }
            Estimator::Ols | Estimator::OlsSlope => {
                vec![EquivarianceTag::XScaleInverseEquivariant]
            }
            Estimator::Constant { .. } => Vec::new(),
        }
    }

    pub fn has_tag(&self, tag: EquivarianceTag) -> bool {
        self.tags().contains(&tag)
    }

    /// Descriptor under the given sample domain. The domain only affects the
    /// value space of location estimators, which inherit the nonnegative
    /// restriction of their inputs.
    pub fn descriptor(&self, domain: Domain) -> EstimatorDescriptor {
        let value_space = match self {
            Estimator::Mean | Estimator::Median | Estimator::TrimmedMean { .. } => {
                if domain == Domain::Nonnegative {
                    ValueSpace::HalfLine { lower: 0.0 }
                } else {
                    ValueSpace::FullEuclidean { dimension: 1 }
                }
            }
            Estimator::StdDev | Estimator::Mad | Estimator::SkewnessB1 => {
                ValueSpace::HalfLine { lower: 0.0 }
            }
            // m4 >= m2^2 for every sample, so 1 is the attainable lower edge.
            Estimator::KurtosisB2 => ValueSpace::HalfLine { lower: 1.0 },
            Estimator::Ols => ValueSpace::FullEuclidean { dimension: 2 },
            Estimator::OlsSlope => ValueSpace::FullEuclidean { dimension: 1 },
            Estimator::Constant { value } => ValueSpace::Singleton {
                point: vec![*value],
            },
        };
        EstimatorDescriptor {
            name: self.name(),
            arity: self.arity(),
            min_n: self.min_n(),
            value_space,
            tags: self.tags(),
        }
    }

    /// Evaluate the estimator on a sample.
    pub fn evaluate(&self, sample: &Sample) -> Result<EstimateValue> {
        if sample.len() < self.min_n() {
            return Err(Error::SampleTooSmall {
                what: self.static_label(),
                min: self.min_n(),
                actual: sample.len(),
            });
        }
        match self.arity() {
            Arity::Scalar => {
                let values = sample.values_or_err()?;
                EstimateValue::scalar(self.eval_scalar(values)?)
            }
            Arity::Regression => {
                let pairs = sample.pairs_or_err()?;
                let (intercept, slope) = ols_fit(pairs)?;
                match self {
                    Estimator::Ols => EstimateValue::new(vec![intercept, slope]),
                    Estimator::OlsSlope => EstimateValue::scalar(slope),
                    _ => unreachable!("regression arity covers exactly the ols estimators"),
                }
            }
        }
    }

    fn static_label(&self) -> &'static str {
        match self {
            Estimator::Mean => "mean",
            Estimator::Median => "median",
            Estimator::TrimmedMean { .. } => "trimmed_mean",
            Estimator::StdDev => "std_dev",
            Estimator::Mad => "mad",
            Estimator::SkewnessB1 => "b1",
            Estimator::KurtosisB2 => "b2",
            Estimator::Ols => "ols",
            Estimator::OlsSlope => "ols_slope",
            Estimator::Constant { .. } => "constant",
        }
    }

    /// Scalar evaluation on a raw value slice (unsorted).
    pub(crate) fn eval_scalar(&self, values: &[f64]) -> Result<f64> {
        match self {
            Estimator::Mean => Ok(mean_of(values)),
            Estimator::Median | Estimator::TrimmedMean { .. } | Estimator::Mad => {
                let mut sorted = values.to_vec();
                sorted.sort_unstable_by(f64::total_cmp);
                self.eval_sorted(&sorted)
            }
            Estimator::StdDev => std_dev_of(values),
            Estimator::SkewnessB1 => skewness_b1_of(values),
            Estimator::KurtosisB2 => kurtosis_b2_of(values),
            Estimator::Constant { value } => Ok(*value),
            Estimator::Ols | Estimator::OlsSlope => Err(Error::ExpectedRegressionSample),
        }
    }

    /// Scalar evaluation on values already sorted ascending. This is the
    /// hot path of the reachable-set oracle; it must agree exactly with
    /// [`Estimator::eval_scalar`] (the order-insensitive estimators simply
    /// share code).
    pub(crate) fn eval_sorted(&self, sorted: &[f64]) -> Result<f64> {
        debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
        match self {
            Estimator::Mean => Ok(mean_of(sorted)),
            Estimator::Median => Ok(median_sorted(sorted)),
            Estimator::TrimmedMean { alpha } => trimmed_mean_sorted(sorted, *alpha),
            Estimator::StdDev => std_dev_of(sorted),
            Estimator::Mad => Ok(mad_sorted(sorted)),
            Estimator::SkewnessB1 => skewness_b1_of(sorted),
            Estimator::KurtosisB2 => kurtosis_b2_of(sorted),
            Estimator::Constant { value } => Ok(*value),
            Estimator::Ols | Estimator::OlsSlope => Err(Error::ExpectedRegressionSample),
        }
    }
}

impl std::fmt::Display for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name())
    }
}

impl Serialize for Estimator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for Estimator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let name = String::deserialize(deserializer)?;
        Estimator::parse(&name).map_err(D::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// scalar kernels
// ---------------------------------------------------------------------------

fn mean_of(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Median of a sorted slice; midpoint of the two central values for even `n`.
fn median_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Mean of the sorted slice with `floor(n*alpha)` values cut from each end.
fn trimmed_mean_sorted(sorted: &[f64], alpha: f64) -> Result<f64> {
    let n = sorted.len();
    let cut = (n as f64 * alpha).floor() as usize;
    let kept = &sorted[cut..n - cut];
    if kept.is_empty() {
        return Err(Error::DegenerateSample {
            what: "trimmed_mean",
            detail: format!("trimming {cut} from each end of n = {n} leaves nothing"),
        });
    }
    Ok(mean_of(kept))
}

/// Median absolute deviation about the median (no consistency factor).
fn mad_sorted(sorted: &[f64]) -> f64 {
    let center = median_sorted(sorted);
    let mut deviations: Vec<f64> = sorted.iter().map(|&v| (v - center).abs()).collect();
    deviations.sort_unstable_by(f64::total_cmp);
    median_sorted(&deviations)
}

/// Central moments of the rescaled deviations `u_i = (x_i - mean) / scale`
/// with `scale = max |x_i - mean|`. Returns `None` for constant samples.
struct ScaledMoments {
    scale: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

fn scaled_central_moments(values: &[f64]) -> Option<ScaledMoments> {
    let n = values.len() as f64;
    let mean = mean_of(values);
    let scale = values
        .iter()
        .map(|&v| (v - mean).abs())
        .fold(0.0_f64, f64::max);
    if scale == 0.0 {
        return None;
    }
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in values {
        let u = (v - mean) / scale;
        let u2 = u * u;
        m2 += u2;
        m3 += u2 * u;
        m4 += u2 * u2;
    }
    Some(ScaledMoments {
        scale,
        m2: m2 / n,
        m3: m3 / n,
        m4: m4 / n,
    })
}

/// Standard deviation with `1/n` normalization; `0` for constant samples.
fn std_dev_of(values: &[f64]) -> Result<f64> {
    match scaled_central_moments(values) {
        Some(m) => Ok(m.scale * m.m2.sqrt()),
        None => Ok(0.0),
    }
}

/// Moment skewness `b1 = m3^2 / m2^3`; the rescaling factor cancels exactly.
fn skewness_b1_of(values: &[f64]) -> Result<f64> {
    let m = scaled_central_moments(values).ok_or(Error::DegenerateSample {
        what: "b1",
        detail: "sample variance is zero".into(),
    })?;
    Ok((m.m3 * m.m3) / (m.m2 * m.m2 * m.m2))
}

/// Moment kurtosis `b2 = m4 / m2^2` (no excess correction).
fn kurtosis_b2_of(values: &[f64]) -> Result<f64> {
    let m = scaled_central_moments(values).ok_or(Error::DegenerateSample {
        what: "b2",
        detail: "sample variance is zero".into(),
    })?;
    Ok(m.m4 / (m.m2 * m.m2))
}

/// Limit of `b1` when a single observation escapes to infinity: for any base
/// sample of size `n`, the skewness tends to `(n-2)^2 / (n-1)`.
pub fn b1_outlier_limit(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::SampleTooSmall {
            what: "b1",
            min: 3,
            actual: n,
        });
    }
    let nf = n as f64;
    Ok((nf - 2.0) * (nf - 2.0) / (nf - 1.0))
}

/// Least-squares fit of `y = intercept + slope * x`, computed on centered
/// coordinates for numerical stability.
fn ols_fit(pairs: &[(f64, f64)]) -> Result<(f64, f64)> {
    let n = pairs.len() as f64;
    let x_bar = pairs.iter().map(|&(x, _)| x).sum::<f64>() / n;
    let y_bar = pairs.iter().map(|&(_, y)| y).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in pairs {
        let dx = x - x_bar;
        sxx += dx * dx;
        sxy += dx * (y - y_bar);
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateSample {
            what: "ols",
            detail: "covariate variance is zero".into(),
        });
    }
    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;
    Ok((intercept, slope))
}
