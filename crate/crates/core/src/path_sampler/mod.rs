//! Weighted Brownian paths for the Gibbs measure `dP_{β,T} ∝ e^{β∫v(x_s)ds} dP_{0,T}`.
//!
//! Path j is drawn from its own ChaCha8 stream `(seed, j)`, so an ensemble is
//! a pure function of its parameters whatever the thread count.

mod stats;
mod transition;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use stats::{
    diffusive_rescale_stats, endpoint_density, pinned_weights, radial_law_masses, CovarianceRow,
    CovarianceTable, EndpointHistogram, PinnedWeights, PooledMoment,
};
pub use transition::{
    limiting_process_density, log_gradient_defect, q_transition_check, stationarity_defect, LimitingDensity,
    TransitionCheck,
};

use crate::dimension::Dimension;
use crate::error::{invalid, Result};
use crate::potential::RadialPotential;

/// ESS below which an ensemble carries a degeneracy warning.
pub const ESS_WARNING: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerParams {
    pub d: Dimension,
    pub beta: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    /// Fractions of T at which positions are kept, in (0, 1].
    pub snapshots: Vec<f64>,
}

impl SamplerParams {
    pub fn new(d: Dimension, beta: f64, horizon: f64, n_steps: usize, n_paths: usize, seed: u64) -> Self {
        Self {
            d,
            beta,
            horizon,
            n_steps,
            n_paths,
            seed,
            snapshots: Vec::new(),
        }
    }

    pub fn with_snapshots(mut self, fractions: Vec<f64>) -> Self {
        self.snapshots = fractions;
        self
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    fn snapshot_steps(&self) -> Result<Vec<usize>> {
        self.snapshots
            .iter()
            .map(|&f| {
                if !(f > 0.0 && f <= 1.0) {
                    return Err(invalid("snapshots", format!("fraction {f} outside (0, 1]")));
                }
                let k = (f * self.n_steps as f64).round() as usize;
                if ((k as f64) / self.n_steps as f64 - f).abs() > 1e-9 {
                    return Err(invalid("snapshots", format!("fraction {f} is not on the time grid")));
                }
                Ok(k)
            })
            .collect()
    }

    fn validate(&self, v: &RadialPotential) -> Result<()> {
        if v.dimension() != self.d {
            return Err(invalid("d", "potential and sampler dimensions differ"));
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(invalid("beta", format!("must be finite and >= 0, got {}", self.beta)));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(invalid("T", format!("must be positive, got {}", self.horizon)));
        }
        if self.n_steps == 0 || self.n_paths == 0 {
            return Err(invalid("n_paths", "need at least one step and one path"));
        }
        let scale = 2.0 * v.support_radius();
        if self.dt() > 0.1 * scale * scale {
            return Err(invalid(
                "n_steps",
                format!("dt = {} exceeds 0.1·(diameter of supp v)² = {}", self.dt(), 0.1 * scale * scale),
            ));
        }
        Ok(())
    }
}

/// Weighted ensemble; raw paths are not kept, only endpoints and snapshots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEnsemble {
    pub params: SamplerParams,
    /// `β ∫₀ᵀ v(x_s) ds` per path (trapezoidal rule).
    pub log_weights: Vec<f64>,
    /// `x_j(T)`, row-major `n_paths × d`.
    pub endpoints: Vec<f64>,
    /// `snapshots[k]` holds `x_j(f_k T)`, row-major `n_paths × d`.
    pub snapshots: Vec<Vec<f64>>,
}

impl PathEnsemble {
    pub fn n_paths(&self) -> usize {
        self.log_weights.len()
    }

    fn max_log_weight(&self) -> f64 {
        self.log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Weights `e^{lw − max lw}`; the common factor cancels in self-normalized estimators.
    pub fn relative_weights(&self) -> Vec<f64> {
        let m = self.max_log_weight();
        self.log_weights.iter().map(|lw| (lw - m).exp()).collect()
    }

    /// Absolute weights `e^{β∫v}`.
    pub fn weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|lw| lw.exp()).collect()
    }

    /// Estimate of `Z_{β,T}(0)` and its standard error.
    pub fn partition_estimate(&self) -> (f64, f64) {
        let m = self.max_log_weight();
        let w = self.relative_weights();
        let n = w.len() as f64;
        let mean = w.iter().sum::<f64>() / n;
        let var = if w.len() > 1 {
            w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        (mean * m.exp(), (var / n).sqrt() * m.exp())
    }

    /// `(Σw)²/Σw²`.
    pub fn ess(&self) -> f64 {
        effective_sample_size(&self.relative_weights())
    }

    pub fn endpoint(&self, j: usize) -> &[f64] {
        let d = self.params.d.get() as usize;
        &self.endpoints[j * d..(j + 1) * d]
    }

    /// `x_j` at snapshot k.
    pub fn snapshot(&self, k: usize, j: usize) -> &[f64] {
        let d = self.params.d.get() as usize;
        &self.snapshots[k][j * d..(j + 1) * d]
    }

    /// JSON summary: params, Z estimate, s.e., ESS and an endpoint histogram.
    pub fn summary(&self, histogram: EndpointHistogram) -> EnsembleSummary {
        let (z_hat, z_se) = self.partition_estimate();
        let ess = self.ess();
        EnsembleSummary {
            params: self.params.clone(),
            z_hat,
            z_se,
            ess,
            ess_warning: ess < ESS_WARNING,
            histogram,
        }
    }
}

pub fn effective_sample_size(w: &[f64]) -> f64 {
    let s: f64 = w.iter().sum();
    let s2: f64 = w.iter().map(|x| x * x).sum();
    if s2 > 0.0 {
        s * s / s2
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub params: SamplerParams,
    #[serde(rename = "Z_hat")]
    pub z_hat: f64,
    #[serde(rename = "Z_se")]
    pub z_se: f64,
    pub ess: f64,
    pub ess_warning: bool,
    pub histogram: EndpointHistogram,
}

struct PathRecord {
    log_weight: f64,
    end: Vec<f64>,
    snaps: Vec<f64>,
}

fn simulate_path(v: &RadialPotential, p: &SamplerParams, snap_steps: &[usize], j: u64) -> PathRecord {
    let d = p.d.get() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    rng.set_stream(j);
    let dt = p.dt();
    let sd = dt.sqrt();
    let mut x = vec![0.0; d];
    let mut snaps = Vec::with_capacity(snap_steps.len() * d);
    let mut v_prev = v.value(0.0);
    let mut integral = 0.0;
    let mut next_snap = 0;
    for step in 1..=p.n_steps {
        for xi in x.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *xi += sd * z;
        }
        let v_now = v.value(x.iter().map(|a| a * a).sum::<f64>().sqrt());
        integral += 0.5 * (v_prev + v_now) * dt;
        v_prev = v_now;
        while next_snap < snap_steps.len() && snap_steps[next_snap] == step {
            snaps.extend_from_slice(&x);
            next_snap += 1;
        }
    }
    PathRecord {
        log_weight: p.beta * integral,
        end: x,
        snaps,
    }
}

/// Samples `n_paths` Brownian paths from the origin with exact Gaussian increments.
pub fn sample_paths(v: &RadialPotential, params: SamplerParams) -> Result<PathEnsemble> {
    params.validate(v)?;
    let snap_steps = params.snapshot_steps()?;
    let mut order: Vec<usize> = (0..snap_steps.len()).collect();
    order.sort_by_key(|&k| snap_steps[k]);
    let sorted_steps: Vec<usize> = order.iter().map(|&k| snap_steps[k]).collect();
    let records: Vec<PathRecord> = (0..params.n_paths as u64)
        .into_par_iter()
        .map(|j| simulate_path(v, &params, &sorted_steps, j))
        .collect();
    let d = params.d.get() as usize;
    let n = params.n_paths;
    let mut snapshots = vec![Vec::with_capacity(n * d); snap_steps.len()];
    let mut log_weights = Vec::with_capacity(n);
    let mut endpoints = Vec::with_capacity(n * d);
    for rec in records {
        log_weights.push(rec.log_weight);
        endpoints.extend_from_slice(&rec.end);
        for (pos, &k) in order.iter().enumerate() {
            snapshots[k].extend_from_slice(&rec.snaps[pos * d..(pos + 1) * d]);
        }
    }
    Ok(PathEnsemble {
        params,
        log_weights,
        endpoints,
        snapshots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(beta: f64, seed: u64) -> PathEnsemble {
        let v = RadialPotential::unit_well(Dimension::THREE);
        sample_paths(&v, SamplerParams::new(Dimension::THREE, beta, 1.0, 50, 200, seed).with_snapshots(vec![1.0, 0.5]))
            .unwrap()
    }

    #[test]
    fn zero_coupling_gives_unit_weights() {
        let e = small(0.0, 1);
        assert!(e.weights().iter().all(|&w| w == 1.0));
        assert_eq!(e.ess(), 200.0);
        assert_eq!(e.partition_estimate(), (1.0, 0.0));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        assert_eq!(small(2.0, 7), small(2.0, 7));
        assert_ne!(small(2.0, 7).endpoints, small(2.0, 8).endpoints);
    }

    #[test]
    fn weights_positive_and_ess_bounded() {
        let e = small(3.0, 3);
        assert!(e.weights().iter().all(|&w| w >= 1.0));
        assert!(e.ess() <= 200.0 + 1e-9);
    }

    #[test]
    fn snapshots_follow_requested_order() {
        let e = small(0.0, 5);
        assert_eq!(e.snapshots.len(), 2);
        assert_eq!(e.snapshot(0, 3), e.endpoint(3));
    }

    #[test]
    fn validates_parameters() {
        let v = RadialPotential::unit_well(Dimension::THREE);
        let p = SamplerParams::new(Dimension::THREE, 1.0, 10.0, 10, 10, 0);
        assert!(sample_paths(&v, p).is_err());
        let p = SamplerParams::new(Dimension::THREE, 1.0, 1.0, 10, 10, 0).with_snapshots(vec![0.33]);
        assert!(sample_paths(&v, p).is_err());
        let p = SamplerParams::new(Dimension::FIVE, 1.0, 1.0, 10, 10, 0);
        assert!(sample_paths(&v, p).is_err());
    }
}
