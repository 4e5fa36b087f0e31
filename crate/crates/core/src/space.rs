//! Value spaces and boundary classification.
//!
//! Every estimator maps samples into a value space `T`. Breakdown analysis
//! cares about the topology of that space: an estimate sequence can break by
//! leaving every bounded set, or by converging to a *boundary point* of `T`.
//! [`ValueSpace`] records the handful of shapes the laboratory needs and
//! [`classify_point`] labels points as interior, boundary, or exterior.
//!
//! Boundary status here is topological, not membership: the lower endpoint of
//! a half-line is a boundary point whether or not the estimator attains it,
//! and the single point of a singleton space is its own boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The shape of an estimator's value space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ValueSpace {
    /// All of `R^p`; no boundary points.
    FullEuclidean { dimension: usize },
    /// A lower-bounded half-line with single boundary point `lower`.
    HalfLine { lower: f64 },
    /// A closed interval `[lower, upper]`; both endpoints are boundary points.
    ClosedInterval { lower: f64, upper: f64 },
    /// A single point; the point is its own boundary.
    Singleton { point: Vec<f64> },
}

/// Topological label assigned by [`classify_point`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointClass {
    Interior,
    Boundary,
    Exterior,
}

impl ValueSpace {
    pub fn full_euclidean(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidValueSpace("dimension must be positive".into()));
        }
        Ok(ValueSpace::FullEuclidean { dimension })
    }

    pub fn half_line(lower: f64) -> Result<Self> {
        if !lower.is_finite() {
            return Err(Error::InvalidValueSpace(format!(
                "half-line endpoint {lower} is not finite"
            )));
        }
        Ok(ValueSpace::HalfLine { lower })
    }

    pub fn closed_interval(lower: f64, upper: f64) -> Result<Self> {
        if !lower.is_finite() || !upper.is_finite() {
            return Err(Error::InvalidValueSpace(
                "interval endpoints must be finite".into(),
            ));
        }
        if lower > upper {
            return Err(Error::InvalidValueSpace(format!(
                "interval endpoints are out of order: [{lower}, {upper}]"
            )));
        }
        Ok(ValueSpace::ClosedInterval { lower, upper })
    }

    pub fn singleton(point: Vec<f64>) -> Result<Self> {
        if point.is_empty() {
            return Err(Error::InvalidValueSpace("singleton point is empty".into()));
        }
        if point.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidValueSpace(
                "singleton point must be finite".into(),
            ));
        }
        Ok(ValueSpace::Singleton { point })
    }

    pub fn dimension(&self) -> usize {
        match self {
            ValueSpace::FullEuclidean { dimension } => *dimension,
            ValueSpace::HalfLine { .. } | ValueSpace::ClosedInterval { .. } => 1,
            ValueSpace::Singleton { point } => point.len(),
        }
    }

    /// The boundary points of the space, if it has finitely many.
    pub fn boundary_points(&self) -> Vec<Vec<f64>> {
        match self {
            ValueSpace::FullEuclidean { .. } => Vec::new(),
            ValueSpace::HalfLine { lower } => vec![vec![*lower]],
            ValueSpace::ClosedInterval { lower, upper } => {
                if lower == upper {
                    vec![vec![*lower]]
                } else {
                    vec![vec![*lower], vec![*upper]]
                }
            }
            ValueSpace::Singleton { point } => vec![point.clone()],
        }
    }

    pub fn classify(&self, point: &[f64]) -> Result<PointClass> {
        classify_point(point, self)
    }
}

/// Classify `point` relative to the value space: exactly one of interior,
/// boundary, or exterior.
pub fn classify_point(point: &[f64], space: &ValueSpace) -> Result<PointClass> {
    if point.len() != space.dimension() {
        return Err(Error::DimensionMismatch {
            point: point.len(),
            space: space.dimension(),
        });
    }
    Ok(match space {
        ValueSpace::FullEuclidean { .. } => PointClass::Interior,
        ValueSpace::HalfLine { lower } => {
            let t = point[0];
            if t < *lower {
                PointClass::Exterior
            } else if t == *lower {
                PointClass::Boundary
            } else {
                PointClass::Interior
            }
        }
        ValueSpace::ClosedInterval { lower, upper } => {
            let t = point[0];
            if t < *lower || t > *upper {
                PointClass::Exterior
            } else if t == *lower || t == *upper {
                PointClass::Boundary
            } else {
                PointClass::Interior
            }
        }
        ValueSpace::Singleton { point: center } => {
            if point == center.as_slice() {
                PointClass::Boundary
            } else {
                PointClass::Exterior
            }
        }
    })
}
