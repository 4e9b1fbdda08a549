use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spatial dimension of the model, 1 through 5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Dimension(u32);

impl Dimension {
    pub const ONE: Self = Self(1);
    pub const THREE: Self = Self(3);
    pub const FOUR: Self = Self(4);
    pub const FIVE: Self = Self(5);

    pub fn new(d: u32) -> Result<Self> {
        if (1..=5).contains(&d) {
            Ok(Self(d))
        } else {
            Err(Error::UnsupportedDimension(d))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0)
    }

    /// Fails with [`Error::SubcriticalDimension`] for d = 1, 2.
    pub fn require_transient(self) -> Result<Self> {
        if self.0 >= 3 {
            Ok(self)
        } else {
            Err(Error::SubcriticalDimension(self.0))
        }
    }

    /// Bessel order ν = d/2 − 1 of the radial problem.
    pub fn bessel_order(self) -> f64 {
        0.5 * self.as_f64() - 1.0
    }

    /// Surface measure of the unit sphere S^{d-1} (for d = 1, the two points ±1).
    pub fn sphere_area(self) -> f64 {
        match self.0 {
            1 => 2.0,
            2 => 2.0 * PI,
            3 => 4.0 * PI,
            4 => 2.0 * PI * PI,
            5 => 8.0 * PI * PI / 3.0,
            _ => unreachable!(),
        }
    }

    /// Radial Jacobian r^{d-1}.
    pub fn radial_weight(self, r: f64) -> f64 {
        r.powi(self.0 as i32 - 1)
    }
}

impl TryFrom<u32> for Dimension {
    type Error = Error;
    fn try_from(d: u32) -> Result<Self> {
        Self::new(d)
    }
}

impl From<Dimension> for u32 {
    fn from(d: Dimension) -> u32 {
        d.0
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(matches!(Dimension::new(0), Err(Error::UnsupportedDimension(0))));
        assert!(matches!(Dimension::new(6), Err(Error::UnsupportedDimension(6))));
        assert!(Dimension::new(2).unwrap().require_transient().is_err());
        assert!(Dimension::new(3).unwrap().require_transient().is_ok());
    }

    #[test]
    fn sphere_area_matches_gamma_formula() {
        for d in 1..=5u32 {
            let dim = Dimension::new(d).unwrap();
            let half = 0.5 * f64::from(d);
            let expected = 2.0 * PI.powf(half) / libm::tgamma(half);
            assert!((dim.sphere_area() - expected).abs() < 1e-12 * expected);
        }
    }

    #[test]
    fn serde_validates() {
        let d: Dimension = serde_json::from_str("4").unwrap();
        assert_eq!(d.get(), 4);
        assert!(serde_json::from_str::<Dimension>("7").is_err());
    }
}
