use serde::{Deserialize, Serialize};

use crate::dimension::Dimension;
use crate::quadrature::{lerp, trapezoid};

/// Scalar radial function sampled on an increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialField {
    pub dimension: Dimension,
    pub r: Vec<f64>,
    pub value: Vec<f64>,
}

impl RadialField {
    pub fn new(dimension: Dimension, r: Vec<f64>, value: Vec<f64>) -> Self {
        assert_eq!(r.len(), value.len(), "grid and values must have equal length");
        Self {
            dimension,
            r,
            value,
        }
    }

    pub fn from_fn(dimension: Dimension, r: Vec<f64>, f: impl Fn(f64) -> f64) -> Self {
        let value = r.iter().map(|&x| f(x)).collect();
        Self::new(dimension, r, value)
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Piecewise-linear interpolation, clamped at the ends.
    pub fn at(&self, r: f64) -> f64 {
        lerp(&self.r, &self.value, r)
    }

    /// `∫_{ℝ^d} f dx` over the sampled range (trapezoidal in r).
    pub fn integral(&self) -> f64 {
        self.weighted_integral(|_| 1.0)
    }

    /// `∫_{ℝ^d} w(|x|) f dx` over the sampled range.
    pub fn weighted_integral(&self, w: impl Fn(f64) -> f64) -> f64 {
        let d = self.dimension;
        let y: Vec<f64> = self
            .r
            .iter()
            .zip(&self.value)
            .map(|(&r, &f)| f * w(r) * d.radial_weight(r))
            .collect();
        d.sphere_area() * trapezoid(&self.r, &y)
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Self {
        let value = self.r.iter().zip(&self.value).map(|(&r, &v)| f(r, v)).collect();
        Self::new(self.dimension, self.r.clone(), value)
    }

    pub fn scale(&mut self, s: f64) {
        self.value.iter_mut().for_each(|v| *v *= s);
    }

    pub fn max_abs(&self) -> f64 {
        self.value.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
