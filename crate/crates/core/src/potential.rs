use serde::{Deserialize, Serialize};

use crate::dimension::Dimension;
use crate::error::{invalid, Result};
use crate::quadrature::{lerp, GaussLegendre};

/// Shape of a radial profile on [0, R_supp].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Profile {
    /// Indicator of the ball.
    Well,
    /// `exp(1 − 1/(1 − (r/R)²))`, smooth with value 1 at the origin.
    Bump,
    /// Samples on an increasing grid starting at 0 and ending at R_supp,
    /// linearly interpolated.
    Sampled { r: Vec<f64>, v: Vec<f64> },
}

/// Nonnegative, compactly supported radial potential `height · profile(r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialPotential {
    dimension: Dimension,
    profile: Profile,
    radius: f64,
    height: f64,
}

impl RadialPotential {
    pub fn new(dimension: Dimension, profile: Profile, radius: f64, height: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(invalid("radius", format!("must be positive, got {radius}")));
        }
        if !(height > 0.0) || !height.is_finite() {
            return Err(invalid("height", format!("must be positive, got {height}")));
        }
        if let Profile::Sampled { r, v } = &profile {
            if r.len() < 2 || r.len() != v.len() {
                return Err(invalid("samples", "need at least two (r, v) pairs of equal length"));
            }
            if r[0] != 0.0 || (r[r.len() - 1] - radius).abs() > 1e-12 * radius {
                return Err(invalid("samples", "radii must span [0, radius]"));
            }
            if r.windows(2).any(|w| w[1] <= w[0]) {
                return Err(invalid("samples", "radii must be strictly increasing"));
            }
            if v.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                return Err(invalid("samples", "profile values must be finite and >= 0"));
            }
            if v.iter().all(|&x| x == 0.0) {
                return Err(invalid("samples", "profile is identically zero"));
            }
        }
        Ok(Self {
            dimension,
            profile,
            radius,
            height,
        })
    }

    /// Unit-height indicator of the unit ball.
    pub fn unit_well(dimension: Dimension) -> Self {
        Self::new(dimension, Profile::Well, 1.0, 1.0).expect("valid")
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn support_radius(&self) -> f64 {
        self.radius
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.dimension, self.profile.clone(), self.radius, self.height * s)
    }

    pub fn value(&self, r: f64) -> f64 {
        let r = r.abs();
        if r > self.radius {
            return 0.0;
        }
        let x = r / self.radius;
        let shape = match &self.profile {
            Profile::Well => 1.0,
            Profile::Bump => {
                if x >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - x * x)).exp()
                }
            }
            Profile::Sampled { r: rs, v } => lerp(rs, v, r),
        };
        self.height * shape
    }

    /// Upper bound on `v`.
    pub fn sup(&self) -> f64 {
        match &self.profile {
            Profile::Well | Profile::Bump => self.height,
            Profile::Sampled { v, .. } => self.height * v.iter().copied().fold(0.0, f64::max),
        }
    }

    /// Radii in (0, R_supp) where the profile is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.profile {
            Profile::Sampled { r, .. } => r[1..r.len() - 1].to_vec(),
            _ => Vec::new(),
        }
    }

    /// Panels [0, b₁, …, R_supp] on which the profile is smooth.
    pub fn panels(&self) -> Vec<f64> {
        let mut p = vec![0.0];
        p.extend(self.breakpoints());
        p.push(self.radius);
        p
    }

    /// `∫_{ℝ^d} v dx`.
    pub fn integral(&self) -> f64 {
        let gl = GaussLegendre::new(64);
        let d = self.dimension;
        d.sphere_area() * gl.integrate_panels(&self.panels(), |r| self.value(r) * d.radial_weight(r))
    }
}
