use serde::{Deserialize, Serialize};

use crate::dimension::Dimension;
use crate::error::{invalid, Result};

/// Node spacing: `h0` on `[0, core_radius]`, then growing by `growth` per
/// node up to `h_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spacing {
    pub h0: f64,
    pub core_radius: f64,
    pub growth: f64,
    pub h_max: f64,
}

impl Spacing {
    pub fn new(h0: f64, core_radius: f64, growth: f64, h_max: f64) -> Self {
        Self {
            h0,
            core_radius,
            growth,
            h_max,
        }
    }

    pub fn uniform(h: f64) -> Self {
        Self::new(h, 0.0, 1.0, h)
    }

    fn validate(&self) -> Result<()> {
        if !(self.h0 > 0.0) || !(self.h_max >= self.h0) {
            return Err(invalid("spacing", "need 0 < h0 <= h_max"));
        }
        if !(self.growth >= 1.0) || !(self.core_radius >= 0.0) {
            return Err(invalid("spacing", "need growth >= 1 and core_radius >= 0"));
        }
        Ok(())
    }
}

/// Radial nodes `0 = r_0 < … < r_{n−1} = R_max` with their finite volumes.
///
/// Volumes and conductances omit the sphere area |S^{d−1}|, which cancels
/// in the scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    dimension: Dimension,
    r: Vec<f64>,
    faces: Vec<f64>,
    volumes: Vec<f64>,
    conductances: Vec<f64>,
}

impl RadialGrid {
    pub fn stretched(dimension: Dimension, spacing: Spacing, r_max: f64) -> Result<Self> {
        spacing.validate()?;
        if !(r_max > 10.0 * spacing.h0) || !r_max.is_finite() {
            return Err(invalid("r_max", format!("must exceed 10·h0, got {r_max}")));
        }
        let mut r = vec![0.0];
        let mut h = spacing.h0;
        while let Some(&last) = r.last() {
            if last >= r_max {
                break;
            }
            if last >= spacing.core_radius {
                h = (h * spacing.growth).min(spacing.h_max);
            }
            r.push(last + h);
        }
        // Pull the last node onto R_max, merging a sliver cell.
        let n = r.len();
        if n > 2 && r_max - r[n - 2] < 0.5 * (r[n - 2] - r[n - 3]) {
            r.remove(n - 2);
        }
        *r.last_mut().expect("nonempty") = r_max;
        Ok(Self::from_nodes(dimension, r))
    }

    pub fn uniform(dimension: Dimension, r_max: f64, intervals: usize) -> Result<Self> {
        if intervals < 10 {
            return Err(invalid("n_r", format!("need at least 10 intervals, got {intervals}")));
        }
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(invalid("r_max", format!("must be positive, got {r_max}")));
        }
        let h = r_max / intervals as f64;
        Ok(Self::from_nodes(dimension, (0..=intervals).map(|i| i as f64 * h).collect()))
    }

    fn from_nodes(dimension: Dimension, r: Vec<f64>) -> Self {
        let n = r.len();
        let d = dimension.as_f64();
        let mut faces = Vec::with_capacity(n + 1);
        faces.push(0.0);
        faces.extend(r.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        faces.push(r[n - 1]);
        let volumes = faces.windows(2).map(|f| (f[1].powf(d) - f[0].powf(d)) / d).collect();
        let conductances = r
            .windows(2)
            .zip(&faces[1..n])
            .map(|(w, &f)| dimension.radial_weight(f) / (w[1] - w[0]))
            .collect();
        Self {
            dimension,
            r,
            faces,
            volumes,
            conductances,
        }
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        self.r[self.r.len() - 1]
    }

    pub(crate) fn faces(&self) -> &[f64] {
        &self.faces
    }

    pub(crate) fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub(crate) fn conductances(&self) -> &[f64] {
        &self.conductances
    }

    /// Node spacing around radius `r`.
    pub fn spacing_at(&self, r: f64) -> f64 {
        let i = self.r.partition_point(|&x| x < r).clamp(1, self.len() - 1);
        self.r[i] - self.r[i - 1]
    }

    /// `∫_{ℝ^d} u dx` by the finite-volume rule.
    pub fn integrate(&self, u: &[f64]) -> f64 {
        self.dimension.sphere_area() * self.volumes.iter().zip(u).map(|(v, x)| v * x).sum::<f64>()
    }

    /// Nodal approximation of the direction-averaged delta at radius `y`:
    /// a Gaussian of width three local spacings with unit discrete mass.
    pub fn delta(&self, y: f64) -> Result<Vec<f64>> {
        let w = 3.0 * self.spacing_at(y);
        if !(y >= 0.0) || y + 8.0 * w > self.r_max() {
            return Err(invalid("y", format!("radius {y} is not inside the grid")));
        }
        let g: Vec<f64> = self.r.iter().map(|&r| (-(r - y).powi(2) / (2.0 * w * w)).exp()).collect();
        let mass = self.integrate(&g);
        Ok(g.into_iter().map(|x| x / mass).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stretched_grid_shape() {
        let g = RadialGrid::stretched(Dimension::THREE, Spacing::new(0.01, 2.0, 1.05, 1.0), 100.0).unwrap();
        assert_eq!(g.r()[0], 0.0);
        assert_eq!(g.r_max(), 100.0);
        assert!((g.spacing_at(1.0) - 0.01).abs() < 1e-12);
        assert!(g.spacing_at(90.0) <= 1.0 + 1e-12);
        assert!(g.r().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn volumes_tile_the_ball() {
        let g = RadialGrid::stretched(Dimension::FIVE, Spacing::new(0.05, 1.0, 1.1, 0.7), 20.0).unwrap();
        let total: f64 = g.integrate(&vec![1.0; g.len()]);
        let exact = Dimension::FIVE.sphere_area() * 20f64.powi(5) / 5.0;
        assert!((total - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn delta_has_unit_mass() {
        let g = RadialGrid::uniform(Dimension::THREE, 10.0, 1000).unwrap();
        for y in [0.0, 2.5] {
            let u = g.delta(y).unwrap();
            assert!((g.integrate(&u) - 1.0).abs() < 1e-14);
        }
        assert!(g.delta(9.9).is_err());
    }

    #[test]
    fn rejects_bad_spacing() {
        assert!(RadialGrid::stretched(Dimension::THREE, Spacing::new(0.0, 1.0, 1.1, 1.0), 10.0).is_err());
        assert!(RadialGrid::stretched(Dimension::THREE, Spacing::new(0.1, 1.0, 0.9, 1.0), 10.0).is_err());
        assert!(RadialGrid::uniform(Dimension::THREE, 10.0, 3).is_err());
    }
}
