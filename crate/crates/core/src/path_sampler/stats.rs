use serde::{Deserialize, Serialize};

use super::{effective_sample_size, PathEnsemble};
use crate::dimension::Dimension;
use crate::error::{invalid, Error, Result};
use crate::quadrature::GaussLegendre;

/// Self-normalized law of |x(T)| on radial bins plus one tail bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointHistogram {
    /// Bin edges `0 = e_0 < … < e_m`; the tail bin is `[e_m, ∞)`.
    pub edges: Vec<f64>,
    /// `m + 1` masses summing to one.
    pub masses: Vec<f64>,
    pub ess: f64,
}

impl EndpointHistogram {
    /// `½ Σ |p_i − q_i|`.
    pub fn total_variation(&self, reference: &[f64]) -> Result<f64> {
        if reference.len() != self.masses.len() {
            return Err(invalid("reference", "bin counts differ"));
        }
        Ok(0.5 * self.masses.iter().zip(reference).map(|(a, b)| (a - b).abs()).sum::<f64>())
    }

    /// Mass per unit volume of ℝ^d on each finite bin.
    pub fn radial_density(&self, d: Dimension) -> Vec<f64> {
        let k = d.as_f64();
        self.edges
            .windows(2)
            .zip(&self.masses)
            .map(|(e, m)| m / (d.sphere_area() * (e[1].powf(k) - e[0].powf(k)) / k))
            .collect()
    }
}

fn check_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 || edges[0] != 0.0 || edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("bins", "edges must start at 0 and increase"));
    }
    Ok(())
}

fn bin_of(edges: &[f64], r: f64) -> usize {
    edges.partition_point(|&e| e <= r).saturating_sub(1).min(edges.len() - 1)
}

/// Importance-sampling histogram of |x(T)| under `weights` (default: the Gibbs weights).
pub fn endpoint_density(e: &PathEnsemble, edges: &[f64], weights: Option<&[f64]>) -> Result<EndpointHistogram> {
    check_edges(edges)?;
    let owned;
    let w = match weights {
        Some(w) => w,
        None => {
            owned = e.relative_weights();
            &owned
        }
    };
    let mut masses = vec![0.0; edges.len()];
    for (j, &wj) in w.iter().enumerate() {
        let r = e.endpoint(j).iter().map(|a| a * a).sum::<f64>().sqrt();
        masses[bin_of(edges, r)] += wj;
    }
    let total: f64 = masses.iter().sum();
    masses.iter_mut().for_each(|m| *m /= total);
    Ok(EndpointHistogram {
        edges: edges.to_vec(),
        masses,
        ess: effective_sample_size(w),
    })
}

/// Bin masses of the radial law with density `f(|x|)/norm` on ℝ^d; the tail
/// bin takes the remainder. `kinks` are radii where f is not smooth.
pub fn radial_law_masses(d: Dimension, edges: &[f64], kinks: &[f64], norm: f64, f: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    check_edges(edges)?;
    let gl = GaussLegendre::new(24);
    let mut masses: Vec<f64> = edges
        .windows(2)
        .map(|e| {
            let mut breaks = vec![e[0]];
            breaks.extend(kinks.iter().copied().filter(|&k| k > e[0] && k < e[1]));
            breaks.push(e[1]);
            d.sphere_area() * gl.integrate_panels(&breaks, |r| f(r) * d.radial_weight(r)) / norm
        })
        .collect();
    let finite: f64 = masses.iter().sum();
    masses.push(1.0 - finite);
    Ok(masses)
}

/// Gibbs weights conditioned on `|x(T)| ≤ radius`, normalized to sum one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PinnedWeights {
    pub radius: f64,
    pub weights: Vec<f64>,
    pub survivors: usize,
    pub ess: f64,
}

pub fn pinned_weights(e: &PathEnsemble, radius: f64) -> Result<PinnedWeights> {
    if !(radius > 0.0) {
        return Err(invalid("tol_radius", format!("must be positive, got {radius}")));
    }
    let mut w = e.relative_weights();
    let mut survivors = 0;
    for (j, wj) in w.iter_mut().enumerate() {
        let r2: f64 = e.endpoint(j).iter().map(|a| a * a).sum();
        if r2 <= radius * radius {
            survivors += 1;
        } else {
            *wj = 0.0;
        }
    }
    if survivors == 0 {
        return Err(Error::NoSurvivors { radius });
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    let ess = effective_sample_size(&w);
    Ok(PinnedWeights {
        radius,
        weights: w,
        survivors,
        ess,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceRow {
    /// Time as a fraction of T.
    pub t: f64,
    /// Per-coordinate `E[y_c(t)²]`, `y = x(tT)/√T`.
    pub variance: Vec<f64>,
    pub variance_se: Vec<f64>,
}

/// Coordinate-pooled second moment `E[a·b]/d` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PooledMoment {
    pub s: f64,
    pub t: f64,
    pub value: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceTable {
    pub rows: Vec<CovarianceRow>,
    /// `E[y(s)·y(t)]/d` for every snapshot pair s < t.
    pub cross: Vec<PooledMoment>,
    /// Correlation of `y(t) − y(s)` with `y(s)` for consecutive snapshots.
    pub increment_correlation: Vec<PooledMoment>,
    pub ess: f64,
}

/// Weighted mean of per-path values and its delta-method standard error
/// (weights sum to one).
fn weighted_mean(w: &[f64], q: impl Fn(usize) -> f64) -> (f64, f64) {
    let m: f64 = w.iter().enumerate().map(|(j, wj)| wj * q(j)).sum();
    let v: f64 = w
        .iter()
        .enumerate()
        .filter(|(_, &wj)| wj > 0.0)
        .map(|(j, wj)| wj * wj * (q(j) - m).powi(2))
        .sum();
    (m, v.sqrt())
}

/// Second moments of the rescaled path `y(t) = x(tT)/√T` at the ensemble's
/// snapshots. The laws are centered by symmetry, so raw moments are used.
pub fn diffusive_rescale_stats(e: &PathEnsemble, weights: Option<&[f64]>) -> Result<CovarianceTable> {
    if e.snapshots.is_empty() {
        return Err(invalid("snapshots", "ensemble has no snapshots"));
    }
    let w: Vec<f64> = match weights {
        Some(w) => {
            let s: f64 = w.iter().sum();
            w.iter().map(|x| x / s).collect()
        }
        None => {
            let r = e.relative_weights();
            let s: f64 = r.iter().sum();
            r.into_iter().map(|x| x / s).collect()
        }
    };
    let d = e.params.d.get() as usize;
    let scale = 1.0 / e.params.horizon;
    let mut order: Vec<usize> = (0..e.snapshots.len()).collect();
    order.sort_by(|&a, &b| e.params.snapshots[a].total_cmp(&e.params.snapshots[b]));
    let rows = order
        .iter()
        .map(|&k| {
            let (variance, variance_se) = (0..d)
                .map(|c| weighted_mean(&w, |j| e.snapshot(k, j)[c].powi(2) * scale))
                .unzip();
            CovarianceRow {
                t: e.params.snapshots[k],
                variance,
                variance_se,
            }
        })
        .collect();
    let dot = |a: usize, b: usize, j: usize| -> f64 {
        let (x, y) = (e.snapshot(a, j), e.snapshot(b, j));
        x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>() * scale / d as f64
    };
    let mut cross = Vec::new();
    for (i, &a) in order.iter().enumerate() {
        for &b in &order[i + 1..] {
            let (value, se) = weighted_mean(&w, |j| dot(a, b, j));
            cross.push(PooledMoment {
                s: e.params.snapshots[a],
                t: e.params.snapshots[b],
                value,
                se,
            });
        }
    }
    let increment_correlation = order
        .windows(2)
        .map(|p| {
            let (a, b) = (p[0], p[1]);
            let inc = |j: usize| dot(a, b, j) - dot(a, a, j);
            let (m_ab, se) = weighted_mean(&w, inc);
            let (m_aa, _) = weighted_mean(&w, |j| dot(a, a, j));
            let (m_inc2, _) = weighted_mean(&w, |j| dot(b, b, j) - 2.0 * dot(a, b, j) + dot(a, a, j));
            let norm = (m_aa * m_inc2).sqrt();
            PooledMoment {
                s: e.params.snapshots[a],
                t: e.params.snapshots[b],
                value: m_ab / norm,
                se: se / norm,
            }
        })
        .collect();
    Ok(CovarianceTable {
        rows,
        cross,
        increment_correlation,
        ess: effective_sample_size(&w),
    })
}

#[cfg(test)]
mod tests {
    use super::super::{sample_paths, SamplerParams};
    use super::*;
    use crate::potential::RadialPotential;

    fn free(n: usize) -> PathEnsemble {
        let v = RadialPotential::unit_well(Dimension::THREE);
        sample_paths(&v, SamplerParams::new(Dimension::THREE, 0.0, 1.0, 20, n, 11).with_snapshots(vec![0.5, 1.0])).unwrap()
    }

    #[test]
    fn histogram_masses_sum_to_one() {
        let e = free(500);
        let h = endpoint_density(&e, &[0.0, 0.5, 1.0, 2.0], None).unwrap();
        assert_eq!(h.masses.len(), 4);
        assert!((h.masses.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(endpoint_density(&e, &[0.1, 1.0], None).is_err());
    }

    #[test]
    fn infinite_ball_recovers_unpinned_weights() {
        let v = RadialPotential::unit_well(Dimension::THREE);
        let e = sample_paths(&v, SamplerParams::new(Dimension::THREE, 2.0, 1.0, 20, 300, 2)).unwrap();
        let p = pinned_weights(&e, f64::INFINITY).unwrap();
        let w = e.relative_weights();
        let s: f64 = w.iter().sum();
        assert_eq!(p.survivors, 300);
        for (a, b) in p.weights.iter().zip(&w) {
            assert_eq!(*a, b / s);
        }
        assert!(matches!(pinned_weights(&e, 1e-9), Err(Error::NoSurvivors { .. })));
    }

    #[test]
    fn radial_law_masses_of_gaussian() {
        let d = Dimension::THREE;
        let g = |r: f64| (2.0 * std::f64::consts::PI).powf(-1.5) * (-0.5 * r * r).exp();
        let m = radial_law_masses(d, &[0.0, 1.0, 2.0, 3.0], &[], 1.0, g).unwrap();
        // P(chi_3 ≤ 1) = erf(1/√2) − √(2/π)e^{−1/2}
        let p1 = libm::erf(1.0 / 2f64.sqrt()) - (2.0 / std::f64::consts::PI).sqrt() * (-0.5f64).exp();
        assert!((m[0] - p1).abs() < 1e-13);
        assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn table_layout() {
        let e = free(400);
        let t = diffusive_rescale_stats(&e, None).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rows[0].t, 0.5);
        assert_eq!(t.cross.len(), 1);
        assert_eq!(t.increment_correlation.len(), 1);
        assert!(t.rows[1].variance.iter().all(|v| (v - 1.0).abs() < 0.3));
    }
}
