//! Signed measures with finite support.

use thiserror::Error;

use crate::metric::FiniteMetricSpace;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MeasureError {
    #[error("weight vector has length {got}, space has {expected} points")]
    LengthMismatch { got: usize, expected: usize },
    #[error("weight {index} is not finite")]
    NonFinite { index: usize },
    #[error("point index {index} out of range for {n} points")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("measures live on different spaces")]
    SpaceMismatch,
}

/// A signed measure: one real weight per point of a fixed metric space.
///
/// The measure keeps a handle to its space so that cross-space arithmetic
/// is a detectable error instead of silent misuse. Values are immutable
/// and all operations are pure.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedMeasure {
    space: FiniteMetricSpace,
    weights: Vec<f64>,
}

impl SignedMeasure {
    pub fn new(space: &FiniteMetricSpace, weights: Vec<f64>) -> Result<Self, MeasureError> {
        if weights.len() != space.n() {
            return Err(MeasureError::LengthMismatch { got: weights.len(), expected: space.n() });
        }
        if let Some(index) = weights.iter().position(|w| !w.is_finite()) {
            return Err(MeasureError::NonFinite { index });
        }
        Ok(Self { space: space.clone(), weights })
    }

    pub fn zero(space: &FiniteMetricSpace) -> Self {
        Self { space: space.clone(), weights: vec![0.0; space.n()] }
    }

    /// Unit point mass at `index`.
    pub fn dirac(space: &FiniteMetricSpace, index: usize) -> Result<Self, MeasureError> {
        if index >= space.n() {
            return Err(MeasureError::IndexOutOfRange { index, n: space.n() });
        }
        let mut weights = vec![0.0; space.n()];
        weights[index] = 1.0;
        Ok(Self { space: space.clone(), weights })
    }

    pub fn space(&self) -> &FiniteMetricSpace {
        &self.space
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    /// Total mass of the measure.
    pub fn charge(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Total variation: the sum of absolute weights.
    pub fn tv_norm(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }

    /// Whether every weight is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.weights.iter().all(|&w| w == 0.0)
    }

    /// Jordan decomposition into nonnegative parts with `self = plus - minus`.
    pub fn jordan(&self) -> (SignedMeasure, SignedMeasure) {
        let plus = self.weights.iter().map(|&w| w.max(0.0)).collect();
        let minus = self.weights.iter().map(|&w| (-w).max(0.0)).collect();
        (
            Self { space: self.space.clone(), weights: plus },
            Self { space: self.space.clone(), weights: minus },
        )
    }

    pub fn scale(&self, c: f64) -> SignedMeasure {
        assert!(c.is_finite(), "scale factor must be finite");
        Self { space: self.space.clone(), weights: self.weights.iter().map(|w| c * w).collect() }
    }

    pub fn add(&self, other: &SignedMeasure) -> Result<SignedMeasure, MeasureError> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SignedMeasure) -> Result<SignedMeasure, MeasureError> {
        self.combine(other, |a, b| a - b)
    }

    fn combine(
        &self,
        other: &SignedMeasure,
        op: impl Fn(f64, f64) -> f64,
    ) -> Result<SignedMeasure, MeasureError> {
        if !self.space.same_space(&other.space) {
            return Err(MeasureError::SpaceMismatch);
        }
        let weights = self.weights.iter().zip(&other.weights).map(|(&a, &b)| op(a, b)).collect();
        Ok(Self { space: self.space.clone(), weights })
    }
}
