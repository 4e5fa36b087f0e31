//! Samples, domains, and the contamination model.
//!
//! A [`Sample`] is an ordered list of observations together with a domain tag
//! describing the sample space it lives in. Contamination replaces a subset of
//! observations, selected by a [`ContaminationMask`], with values from a second
//! sample drawn from the same space: the contaminated observation at position
//! `i` is `(1 - s_i) * x_i + s_i * y_i` with the indicator `s_i` taken from the
//! mask. All downstream analysis (attacks, detectors, reachable sets) is built
//! on [`contaminate`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single observation: either a scalar or a regression pair `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observation {
    Scalar(f64),
    Pair { x: f64, y: f64 },
}

impl Observation {
    fn is_finite(&self) -> bool {
        match *self {
            Observation::Scalar(v) => v.is_finite(),
            Observation::Pair { x, y } => x.is_finite() && y.is_finite(),
        }
    }
}

/// Sample-space tag. `Real` is the unrestricted scalar line, `Nonnegative`
/// restricts scalars to `[0, inf)`, and `Regression` holds `(x, y)` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    Real,
    Nonnegative,
    Regression,
}

impl Domain {
    pub fn is_scalar(self) -> bool {
        !matches!(self, Domain::Regression)
    }

    pub fn name(self) -> &'static str {
        match self {
            Domain::Real => "real",
            Domain::Nonnegative => "nonnegative",
            Domain::Regression => "regression",
        }
    }
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum SampleData {
    Scalar(Vec<f64>),
    Pairs(Vec<(f64, f64)>),
}

/// An ordered sample of observations with a domain tag.
///
/// Invariants (enforced by the constructors): the sample is nonempty, every
/// observation is finite, and every observation satisfies the domain tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    domain: Domain,
    data: SampleData,
}

impl Sample {
    /// Scalar sample on the unrestricted line.
    pub fn scalar(values: Vec<f64>) -> Result<Self> {
        Self::scalar_with_domain(values, Domain::Real)
    }

    /// Scalar sample restricted to the nonnegative orthant.
    pub fn nonnegative(values: Vec<f64>) -> Result<Self> {
        Self::scalar_with_domain(values, Domain::Nonnegative)
    }

    /// Scalar sample with an explicit (scalar) domain tag.
    pub fn scalar_with_domain(values: Vec<f64>, domain: Domain) -> Result<Self> {
        if !domain.is_scalar() {
            return Err(Error::ExpectedScalarSample);
        }
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFiniteObservation { index, value });
            }
            if domain == Domain::Nonnegative && value < 0.0 {
                return Err(Error::DomainViolation {
                    index,
                    value,
                    domain: "nonnegative",
                });
            }
        }
        Ok(Sample {
            domain,
            data: SampleData::Scalar(values),
        })
    }

    /// Regression sample of `(x, y)` pairs.
    pub fn regression(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptySample);
        }
        for (index, &(x, y)) in pairs.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFiniteObservation { index, value: x });
            }
            if !y.is_finite() {
                return Err(Error::NonFiniteObservation { index, value: y });
            }
        }
        Ok(Sample {
            domain: Domain::Regression,
            data: SampleData::Pairs(pairs),
        })
    }

    /// Re-tag a scalar sample with another scalar domain, revalidating.
    pub fn retag(&self, domain: Domain) -> Result<Self> {
        match &self.data {
            SampleData::Scalar(values) => Self::scalar_with_domain(values.clone(), domain),
            SampleData::Pairs(_) => {
                if domain == Domain::Regression {
                    Ok(self.clone())
                } else {
                    Err(Error::ExpectedScalarSample)
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        match &self.data {
            SampleData::Scalar(v) => v.len(),
            SampleData::Pairs(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn is_scalar(&self) -> bool {
        self.domain.is_scalar()
    }

    /// Scalar values, if this is a scalar sample.
    pub fn values(&self) -> Option<&[f64]> {
        match &self.data {
            SampleData::Scalar(v) => Some(v),
            SampleData::Pairs(_) => None,
        }
    }

    /// Regression pairs, if this is a regression sample.
    pub fn pairs(&self) -> Option<&[(f64, f64)]> {
        match &self.data {
            SampleData::Pairs(p) => Some(p),
            SampleData::Scalar(_) => None,
        }
    }

    pub fn values_or_err(&self) -> Result<&[f64]> {
        self.values().ok_or(Error::ExpectedScalarSample)
    }

    pub fn pairs_or_err(&self) -> Result<&[(f64, f64)]> {
        self.pairs().ok_or(Error::ExpectedRegressionSample)
    }

    pub fn observation(&self, index: usize) -> Option<Observation> {
        match &self.data {
            SampleData::Scalar(v) => v.get(index).map(|&value| Observation::Scalar(value)),
            SampleData::Pairs(p) => p.get(index).map(|&(x, y)| Observation::Pair { x, y }),
        }
    }

    pub fn observations(&self) -> Vec<Observation> {
        match &self.data {
            SampleData::Scalar(v) => v.iter().map(|&value| Observation::Scalar(value)).collect(),
            SampleData::Pairs(p) => p.iter().map(|&(x, y)| Observation::Pair { x, y }).collect(),
        }
    }

    /// Build a sample of the same domain from raw observations, revalidating.
    pub fn from_observations(observations: &[Observation], domain: Domain) -> Result<Self> {
        if domain.is_scalar() {
            let mut values = Vec::with_capacity(observations.len());
            for obs in observations {
                match *obs {
                    Observation::Scalar(v) => values.push(v),
                    Observation::Pair { .. } => return Err(Error::ExpectedScalarSample),
                }
            }
            Self::scalar_with_domain(values, domain)
        } else {
            let mut pairs = Vec::with_capacity(observations.len());
            for obs in observations {
                match *obs {
                    Observation::Pair { x, y } => pairs.push((x, y)),
                    Observation::Scalar(_) => return Err(Error::ExpectedRegressionSample),
                }
            }
            Self::regression(pairs)
        }
    }

    fn check_finite(&self) -> Result<()> {
        for (index, obs) in self.observations().iter().enumerate() {
            if !obs.is_finite() {
                let value = match *obs {
                    Observation::Scalar(v) => v,
                    Observation::Pair { x, y } => {
                        if x.is_finite() {
                            y
                        } else {
                            x
                        }
                    }
                };
                return Err(Error::NonFiniteObservation { index, value });
            }
        }
        Ok(())
    }
}

/// Indicator mask selecting which positions are replaced during contamination.
///
/// The outlier count `s` is always the number of `true` flags; it is computed,
/// never stored, so the two can not drift apart.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContaminationMask {
    flags: Vec<bool>,
}

impl ContaminationMask {
    pub fn new(flags: Vec<bool>) -> Result<Self> {
        if flags.is_empty() {
            return Err(Error::EmptySample);
        }
        Ok(ContaminationMask { flags })
    }

    /// Mask of length `n` flagging the first `s` positions.
    pub fn first(n: usize, s: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySample);
        }
        if s > n {
            return Err(Error::TooManyOutliers { s, n });
        }
        Ok(ContaminationMask {
            flags: (0..n).map(|i| i < s).collect(),
        })
    }

    /// Mask of length `n` flagging exactly the given positions.
    pub fn from_positions(n: usize, positions: &[usize]) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySample);
        }
        let mut flags = vec![false; n];
        for &index in positions {
            if index >= n {
                return Err(Error::IndexOutOfRange { index, len: n });
            }
            flags[index] = true;
        }
        Ok(ContaminationMask { flags })
    }

    /// Mask flagging every position the given mask leaves alone.
    pub fn complement(&self) -> Self {
        ContaminationMask {
            flags: self.flags.iter().map(|&f| !f).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn is_flagged(&self, index: usize) -> bool {
        self.flags.get(index).copied().unwrap_or(false)
    }

    /// Flagged positions in increasing order.
    pub fn positions(&self) -> Vec<usize> {
        self.flags
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| f.then_some(i))
            .collect()
    }

    /// Number of flagged positions (the outlier count `s`).
    pub fn count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }
}

/// Number of outliers a mask injects; alias for [`ContaminationMask::count`].
pub fn outlier_count(mask: &ContaminationMask) -> usize {
    mask.count()
}

/// Replace the masked positions of `x` with the corresponding entries of `y`.
///
/// `x` and `y` must share length and domain tag, and the mask must have the
/// same length. Unmasked entries of `y` are ignored.
pub fn contaminate(x: &Sample, y: &Sample, mask: &ContaminationMask) -> Result<Sample> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.domain() != y.domain() {
        return Err(Error::DomainMismatch {
            left: x.domain().to_string(),
            right: y.domain().to_string(),
        });
    }
    if mask.len() != x.len() {
        return Err(Error::LengthMismatch {
            left: mask.len(),
            right: x.len(),
        });
    }
    y.check_finite()?;
    let domain = x.domain();
    match (&x.data, &y.data) {
        (SampleData::Scalar(xv), SampleData::Scalar(yv)) => {
            let values = xv
                .iter()
                .zip(yv)
                .zip(mask.flags())
                .map(|((&xi, &yi), &flag)| if flag { yi } else { xi })
                .collect();
            Sample::scalar_with_domain(values, domain)
        }
        (SampleData::Pairs(xp), SampleData::Pairs(yp)) => {
            let pairs = xp
                .iter()
                .zip(yp)
                .zip(mask.flags())
                .map(|((&xi, &yi), &flag)| if flag { yi } else { xi })
                .collect();
            Sample::regression(pairs)
        }
        // Domains already matched above, so the arities match too.
        _ => unreachable!("domain tag and storage arity are kept in sync"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(values: &[f64]) -> Sample {
        Sample::scalar(values.to_vec()).unwrap()
    }

    #[test]
    fn contaminate_replaces_masked_positions() {
        let x = s(&[1.0, 2.0, 3.0]);
        let y = s(&[9.0, 9.0, 9.0]);
        let mask = ContaminationMask::new(vec![false, true, false]).unwrap();
        let z = contaminate(&x, &y, &mask).unwrap();
        assert_eq!(z.values().unwrap(), &[1.0, 9.0, 3.0]);
    }

    #[test]
    fn contaminate_with_zero_mask_is_identity() {
        let x = s(&[1.0, 2.0, 3.0]);
        let y = s(&[7.0, 8.0, 9.0]);
        let mask = ContaminationMask::new(vec![false, false, false]).unwrap();
        assert_eq!(contaminate(&x, &y, &mask).unwrap(), x);
    }

    #[test]
    fn contaminate_with_full_mask_yields_y() {
        let x = s(&[1.0, 2.0, 3.0]);
        let y = s(&[7.0, 8.0, 9.0]);
        let mask = ContaminationMask::new(vec![true, true, true]).unwrap();
        assert_eq!(contaminate(&x, &y, &mask).unwrap(), y);
    }

    #[test]
    fn contaminate_rejects_length_mismatch() {
        let x = s(&[1.0, 2.0, 3.0]);
        let y = s(&[1.0, 2.0]);
        let mask = ContaminationMask::first(3, 1).unwrap();
        assert!(matches!(
            contaminate(&x, &y, &mask),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn contaminate_rejects_domain_mismatch() {
        let x = Sample::nonnegative(vec![1.0, 2.0]).unwrap();
        let y = s(&[1.0, -5.0]);
        let mask = ContaminationMask::first(2, 1).unwrap();
        assert!(matches!(
            contaminate(&x, &y, &mask),
            Err(Error::DomainMismatch { .. })
        ));
    }

    #[test]
    fn contaminate_regression_replaces_pairs() {
        let x = Sample::regression(vec![(0.0, 0.0), (1.0, 1.0)]).unwrap();
        let y = Sample::regression(vec![(5.0, -1.0), (6.0, -2.0)]).unwrap();
        let mask = ContaminationMask::new(vec![true, false]).unwrap();
        let z = contaminate(&x, &y, &mask).unwrap();
        assert_eq!(z.pairs().unwrap(), &[(5.0, -1.0), (1.0, 1.0)]);
    }

    #[test]
    fn nonnegative_domain_rejects_negative_values() {
        assert!(matches!(
            Sample::nonnegative(vec![1.0, -0.5]),
            Err(Error::DomainViolation { .. })
        ));
    }

    #[test]
    fn samples_reject_non_finite_values() {
        assert!(matches!(
            Sample::scalar(vec![1.0, f64::NAN]),
            Err(Error::NonFiniteObservation { .. })
        ));
        assert!(matches!(
            Sample::regression(vec![(f64::INFINITY, 0.0)]),
            Err(Error::NonFiniteObservation { .. })
        ));
    }

    #[test]
    fn outlier_count_counts_flags() {
        let m = ContaminationMask::new(vec![true, false, true, true, false]).unwrap();
        assert_eq!(outlier_count(&m), 3);
        assert_eq!(
            outlier_count(&ContaminationMask::new(vec![false; 4]).unwrap()),
            0
        );
        assert_eq!(
            outlier_count(&ContaminationMask::new(vec![true; 4]).unwrap()),
            4
        );
    }

    #[test]
    fn first_mask_flags_prefix() {
        let m = ContaminationMask::first(5, 2).unwrap();
        assert_eq!(m.flags(), &[true, true, false, false, false]);
        assert_eq!(m.positions(), vec![0, 1]);
        assert_eq!(m.complement().positions(), vec![2, 3, 4]);
        assert!(ContaminationMask::first(3, 4).is_err());
    }
}
