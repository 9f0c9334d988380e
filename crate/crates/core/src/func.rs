//! Discrete representatives of Lipschitz functions and their norms.

use thiserror::Error;

use crate::measure::SignedMeasure;
use crate::metric::FiniteMetricSpace;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FuncError {
    #[error("value vector has length {got}, space has {expected} points")]
    LengthMismatch { got: usize, expected: usize },
    #[error("value {index} is not finite")]
    NonFinite { index: usize },
    #[error("function and measure live on different spaces")]
    SpaceMismatch,
}

/// A real-valued function on the points of a finite metric space.
///
/// On a finite space every function is Lipschitz; the seminorm below is the
/// best (smallest) Lipschitz constant.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFunction {
    space: FiniteMetricSpace,
    values: Vec<f64>,
}

impl DiscreteFunction {
    pub fn new(space: &FiniteMetricSpace, values: Vec<f64>) -> Result<Self, FuncError> {
        if values.len() != space.n() {
            return Err(FuncError::LengthMismatch { got: values.len(), expected: space.n() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(FuncError::NonFinite { index });
        }
        Ok(Self { space: space.clone(), values })
    }

    pub fn zero(space: &FiniteMetricSpace) -> Self {
        Self { space: space.clone(), values: vec![0.0; space.n()] }
    }

    pub fn constant(space: &FiniteMetricSpace, c: f64) -> Result<Self, FuncError> {
        Self::new(space, vec![c; space.n()])
    }

    pub fn space(&self) -> &FiniteMetricSpace {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Adds a constant to every value.
    pub fn shift(&self, c: f64) -> DiscreteFunction {
        assert!(c.is_finite(), "shift must be finite");
        Self { space: self.space.clone(), values: self.values.iter().map(|v| v + c).collect() }
    }

    /// Best Lipschitz constant: max over pairs of |f(x) - f(y)| / d(x, y).
    ///
    /// Exhaustive O(n^2) pair scan; returns 0 for a single point.
    pub fn lip_seminorm(&self) -> f64 {
        let n = self.values.len();
        let mut lip: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let ratio = (self.values[i] - self.values[j]).abs() / self.space.dist(i, j);
                lip = lip.max(ratio);
            }
        }
        lip
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn sum_norm(&self) -> f64 {
        self.lip_seminorm() + self.sup_norm()
    }

    pub fn max_norm(&self) -> f64 {
        self.lip_seminorm().max(self.sup_norm())
    }

    /// The pairing of a function with a measure: sum of value * weight.
    pub fn integrate(&self, mu: &SignedMeasure) -> Result<f64, FuncError> {
        if !self.space.same_space(mu.space()) {
            return Err(FuncError::SpaceMismatch);
        }
        Ok(self.values.iter().zip(mu.weights()).map(|(v, w)| v * w).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point(d: f64) -> FiniteMetricSpace {
        FiniteMetricSpace::from_matrix(&[vec![0.0, d], vec![d, 0.0]]).unwrap()
    }

    fn line3() -> FiniteMetricSpace {
        FiniteMetricSpace::from_points(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap()
    }

    #[test]
    fn lip_examples() {
        let f = DiscreteFunction::new(&two_point(1.0), vec![0.0, 1.0]).unwrap();
        assert_eq!(f.lip_seminorm(), 1.0);

        let c = DiscreteFunction::constant(&line3(), 3.5).unwrap();
        assert_eq!(c.lip_seminorm(), 0.0);

        // Brute force over the 3 pairs: 1/1, 1/1, 2/2.
        let f = DiscreteFunction::new(&line3(), vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(f.lip_seminorm(), 1.0);
    }

    #[test]
    fn norm_examples() {
        let f = DiscreteFunction::new(&two_point(1.0), vec![0.0, 1.0]).unwrap();
        assert_eq!(f.sup_norm(), 1.0);
        assert_eq!(f.sum_norm(), 2.0);
        assert_eq!(f.max_norm(), 1.0);

        let g = DiscreteFunction::new(&two_point(2.0), vec![0.5, -0.5]).unwrap();
        assert_eq!(g.lip_seminorm(), 0.5);
        assert_eq!(g.sup_norm(), 0.5);
        assert_eq!(g.sum_norm(), 1.0);
        assert_eq!(g.max_norm(), 0.5);

        let z = DiscreteFunction::zero(&two_point(1.0));
        assert_eq!(z.sum_norm(), 0.0);
        assert_eq!(z.max_norm(), 0.0);
    }

    #[test]
    fn one_point_function() {
        let s = FiniteMetricSpace::from_matrix(&[vec![0.0]]).unwrap();
        let f = DiscreteFunction::new(&s, vec![4.0]).unwrap();
        assert_eq!(f.lip_seminorm(), 0.0);
        assert_eq!(f.sup_norm(), 4.0);
    }

    #[test]
    fn integrate_examples() {
        let s = two_point(1.0);
        let f = DiscreteFunction::constant(&s, 1.0).unwrap();
        let mu = SignedMeasure::new(&s, vec![0.3, 0.7]).unwrap();
        assert!((f.integrate(&mu).unwrap() - 1.0).abs() < 1e-15);

        let f = DiscreteFunction::new(&s, vec![0.0, 1.0]).unwrap();
        let d1 = SignedMeasure::dirac(&s, 1).unwrap();
        assert_eq!(f.integrate(&d1).unwrap(), 1.0);

        let f = DiscreteFunction::new(&s, vec![2.0, -1.0]).unwrap();
        let mu = SignedMeasure::new(&s, vec![1.0, -1.0]).unwrap();
        assert_eq!(f.integrate(&mu).unwrap(), 3.0);
    }

    #[test]
    fn integrate_space_mismatch() {
        let f = DiscreteFunction::zero(&two_point(1.0));
        let mu = SignedMeasure::zero(&two_point(2.0));
        assert_eq!(f.integrate(&mu).unwrap_err(), FuncError::SpaceMismatch);
    }
}
