//! Radial Birman–Schwinger operator `A(λ) = v R₀(λ)` and everything derived
//! from its principal eigenvalue: β_cr, λ₀(β), the ground state ψ, the
//! eigenfunction ψ_β, the constants γ, c_d, κ and the subcritical corrector φ_β.
//!
//! Discretization: Gauss–Legendre nodes on [0, R_supp]. Row i integrates the
//! shell-averaged kernel against the barycentric interpolant of the unknown,
//! split at r_i where the kernel has a kink, so convergence is spectral for
//! smooth profiles.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dimension::Dimension;
use crate::error::{invalid, Error, Result};
use crate::field::RadialField;
use crate::greens_kernel::{shell_inverse_distance_r5, shell_resolvent_unchecked, zero_energy_coefficient};
use crate::linalg::{power_iteration, Lu, SquareMatrix};
use crate::potential::RadialPotential;
use crate::quadrature::{Barycentric, GaussLegendre};

pub const POWER_TOL: f64 = 1e-12;
pub const POWER_MAX_ITER: usize = 100_000;
const LAMBDA_REL_TOL: f64 = 1e-10;

/// Nyström resolution: `nodes` collocation radii, `sub_nodes` quadrature
/// points on each side of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub nodes: usize,
    pub sub_nodes: usize,
}

impl Resolution {
    pub fn new(nodes: usize) -> Self {
        Self {
            nodes,
            sub_nodes: nodes.max(16),
        }
    }

    pub fn doubled(self) -> Self {
        Self {
            nodes: 2 * self.nodes,
            sub_nodes: 2 * self.sub_nodes,
        }
    }
}

impl Default for Resolution {
    fn default() -> Self {
        Self::new(32)
    }
}

/// Collocation grid on the support of a potential.
#[derive(Debug, Clone)]
struct NystromGrid {
    d: Dimension,
    radius: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    bary: Barycentric,
    sub: GaussLegendre,
}

impl NystromGrid {
    fn new(d: Dimension, radius: f64, res: Resolution) -> Result<Self> {
        if res.nodes < 8 {
            return Err(invalid("n", format!("need at least 8 nodes, got {}", res.nodes)));
        }
        let gl = GaussLegendre::new(res.nodes);
        let (nodes, weights): (Vec<f64>, Vec<f64>) = gl
            .mapped(0.0, radius)
            .map(|(r, w)| (r, w * d.radial_weight(r)))
            .unzip();
        let bary = Barycentric::new(&nodes);
        Ok(Self {
            d,
            radius,
            nodes,
            weights,
            bary,
            sub: GaussLegendre::new(res.sub_nodes),
        })
    }

    fn n(&self) -> usize {
        self.nodes.len()
    }

    /// Quadrature panels for integrating against a kernel with a kink at `r`.
    fn panels(&self, r: f64) -> Vec<(f64, f64)> {
        if r > 0.0 && r < self.radius {
            vec![(0.0, r), (r, self.radius)]
        } else {
            vec![(0.0, self.radius)]
        }
    }

    /// Row of weights `c_j` with `∫_0^R k(r, s) s^{d-1} h(s) ds ≈ Σ_j c_j h(r_j)`.
    fn product_row(&self, r: f64, kernel: impl Fn(f64, f64) -> f64, out: &mut [f64]) {
        out.fill(0.0);
        let mut basis = vec![0.0; self.n()];
        for (a, b) in self.panels(r) {
            for (s, w) in self.sub.mapped(a, b) {
                let ws = w * kernel(r, s) * self.d.radial_weight(s);
                self.bary.basis_row(s, &mut basis);
                out.iter_mut().zip(&basis).for_each(|(o, l)| *o += ws * l);
            }
        }
    }

    fn apply(&self, r: f64, kernel: impl Fn(f64, f64) -> f64, h: &[f64]) -> f64 {
        self.panels(r)
            .into_iter()
            .flat_map(|(a, b)| self.sub.mapped(a, b).collect::<Vec<_>>())
            .map(|(s, w)| w * kernel(r, s) * self.d.radial_weight(s) * self.bary.eval(h, s))
            .sum()
    }

    /// `∫_{ℝ^d} f` for f sampled at the nodes.
    fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.d.sphere_area() * (0..self.n()).map(|i| self.weights[i] * f(i)).sum::<f64>()
    }
}

fn shell_kernel(d: Dimension, lambda: f64) -> impl Fn(f64, f64) -> f64 + Sync {
    move |r, s| {
        let (lo, hi) = if r <= s { (r, s) } else { (s, r) };
        shell_resolvent_unchecked(d, lambda, lo, hi)
    }
}

/// Nyström matrix of `A(λ)` restricted to radial functions on supp(v).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscretizedOperator {
    pub dimension: Dimension,
    pub lambda: f64,
    /// Collocation radii in (0, R_supp).
    pub nodes: Vec<f64>,
    /// Gauss–Legendre weights times r^{d-1}.
    pub weights: Vec<f64>,
    /// Approximates `A(λ)`; its entries are ≤ 0 up to interpolation error.
    pub matrix: SquareMatrix,
    pub potential_at_nodes: Vec<f64>,
}

fn check_lambda(d: Dimension, lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(invalid("lambda", format!("must be finite and >= 0, got {lambda}")));
    }
    if lambda == 0.0 && d.get() <= 2 {
        return Err(invalid("lambda", format!("must be > 0 in dimension {d}")));
    }
    Ok(())
}

fn assemble_on(grid: &NystromGrid, v: &RadialPotential, lambda: f64) -> Result<DiscretizedOperator> {
    let d = grid.d;
    check_lambda(d, lambda)?;
    let n = grid.n();
    let kernel = shell_kernel(d, lambda);
    let vals: Vec<f64> = grid.nodes.iter().map(|&r| v.value(r)).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0; n];
            if vals[i] != 0.0 {
                grid.product_row(grid.nodes[i], &kernel, &mut row);
                row.iter_mut().for_each(|x| *x *= -vals[i]);
            }
            row
        })
        .collect();
    let matrix = SquareMatrix::from_rows(&rows);
    if matrix.entries().iter().any(|x| !x.is_finite()) {
        return Err(invalid("lambda", "kernel quadrature produced non-finite entries"));
    }
    Ok(DiscretizedOperator {
        dimension: d,
        lambda,
        nodes: grid.nodes.clone(),
        weights: grid.weights.clone(),
        matrix,
        potential_at_nodes: vals,
    })
}

pub fn assemble_operator(v: &RadialPotential, lambda: f64, n: usize) -> Result<DiscretizedOperator> {
    let grid = NystromGrid::new(v.dimension(), v.support_radius(), Resolution::new(n))?;
    assemble_on(&grid, v, lambda)
}

/// Principal eigenpair of `−M`; the vector is normalized to unit maximum.
pub fn principal_eigenvalue(op: &DiscretizedOperator) -> Result<(f64, Vec<f64>)> {
    principal_eigenvalue_of(&op.matrix.scaled(-1.0))
}

/// Power iteration on a matrix with nonnegative dominant eigenvector.
pub fn principal_eigenvalue_of(neg_m: &SquareMatrix) -> Result<(f64, Vec<f64>)> {
    let e = power_iteration(neg_m, POWER_TOL, POWER_MAX_ITER)?;
    let mut h = e.vector;
    // Clean sign noise outside the support.
    h.iter_mut().for_each(|x| {
        if *x < 0.0 && x.abs() < 1e-13 {
            *x = 0.0
        }
    });
    Ok((e.value, h))
}

/// β_cr with a self-convergence error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalBeta {
    pub value: f64,
    /// |β(n) − β(2n)|.
    pub error_estimate: f64,
}

/// β_cr = 1/μ(0) evaluated at `res` and `2·res`; zero for d = 1, 2.
pub fn critical_beta(v: &RadialPotential, res: Resolution) -> Result<CriticalBeta> {
    if v.dimension().get() <= 2 {
        return Ok(CriticalBeta {
            value: 0.0,
            error_estimate: 0.0,
        });
    }
    let coarse = BirmanSchwinger::new(v.clone(), res)?.critical_beta()?;
    let fine = BirmanSchwinger::new(v.clone(), res.doubled())?.critical_beta()?;
    Ok(CriticalBeta {
        value: fine,
        error_estimate: (fine - coarse).abs(),
    })
}

pub fn lambda0(v: &RadialPotential, beta: f64, res: Resolution) -> Result<f64> {
    BirmanSchwinger::new(v.clone(), res)?.lambda0(beta)
}

/// Spectral solver for one potential at a fixed resolution. Every quantity it
/// returns uses the same discretization, so β_cr and λ₀(β) are mutually consistent.
#[derive(Debug, Clone)]
pub struct BirmanSchwinger {
    potential: RadialPotential,
    grid: NystromGrid,
}

/// Ground state and derived data at β = β_cr (d ≥ 3).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundState {
    pub beta_cr: f64,
    /// `h₀ = β_cr v ψ` at the collocation nodes, with unit weighted norm.
    pub h0: Vec<f64>,
    /// ψ at the collocation nodes.
    pub psi_nodes: Vec<f64>,
    pub nodes: Vec<f64>,
}

impl BirmanSchwinger {
    pub fn new(potential: RadialPotential, res: Resolution) -> Result<Self> {
        let grid = NystromGrid::new(potential.dimension(), potential.support_radius(), res)?;
        Ok(Self { potential, grid })
    }

    pub fn potential(&self) -> &RadialPotential {
        &self.potential
    }

    pub fn dimension(&self) -> Dimension {
        self.grid.d
    }

    pub fn nodes(&self) -> &[f64] {
        &self.grid.nodes
    }

    pub fn assemble(&self, lambda: f64) -> Result<DiscretizedOperator> {
        assemble_on(&self.grid, &self.potential, lambda)
    }

    /// μ(λ) = 1/β(λ) and its eigenvector.
    pub fn principal(&self, lambda: f64) -> Result<(f64, Vec<f64>)> {
        principal_eigenvalue(&self.assemble(lambda)?)
    }

    pub fn beta_of_lambda(&self, lambda: f64) -> Result<f64> {
        Ok(1.0 / self.principal(lambda)?.0)
    }

    pub fn critical_beta(&self) -> Result<f64> {
        if self.dimension().get() <= 2 {
            return Ok(0.0);
        }
        self.beta_of_lambda(0.0)
    }

    /// Upper end of the λ bracket: λ₀ ≤ β sup v.
    pub fn lambda_max(&self, beta: f64) -> f64 {
        beta * self.potential.sup()
    }

    /// λ₀(β) by bisection in √λ on `μ(λ)β − 1`; zero for β ≤ β_cr.
    pub fn lambda0(&self, beta: f64) -> Result<f64> {
        if !(beta > 0.0) {
            return Err(invalid("beta", format!("must be positive, got {beta}")));
        }
        let transient = self.dimension().get() >= 3;
        if transient && beta <= self.critical_beta()? {
            return Ok(0.0);
        }
        let f = |s: f64| -> Result<f64> { Ok(self.principal(s * s)?.0 * beta - 1.0) };
        let hi = self.lambda_max(beta).sqrt();
        let f_hi = f(hi)?;
        if f_hi >= 0.0 {
            return Err(Error::BracketFailure {
                lo: 0.0,
                hi: hi * hi,
                f_lo: f64::NAN,
                f_hi,
            });
        }
        // d = 1, 2: μ(λ) → ∞ as λ → 0; walk down until the sign flips.
        let mut lo = if transient { 0.0 } else { hi };
        if !transient {
            loop {
                lo *= 0.5;
                if lo < 1e-150 {
                    return Err(Error::BracketFailure {
                        lo: 0.0,
                        hi: hi * hi,
                        f_lo: f64::NAN,
                        f_hi,
                    });
                }
                if f(lo)? > 0.0 {
                    break;
                }
            }
        }
        let mut hi = hi;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            // λ = s², so a relative tolerance ε in λ needs ε/2 in s.
            if hi - lo <= 0.5 * LAMBDA_REL_TOL * hi {
                break;
            }
        }
        let s = 0.5 * (lo + hi);
        Ok(s * s)
    }

    /// ψ = −R₀(0) h₀ with `‖β_cr v ψ‖` in L²(e^{|x|²}dx) equal to one.
    pub fn ground_state(&self) -> Result<GroundState> {
        let d = self.dimension().require_transient()?;
        let (mu, mut h) = self.principal(0.0)?;
        let beta_cr = 1.0 / mu;
        let norm2 = self
            .grid
            .integrate(|i| h[i] * h[i] * self.grid.nodes[i].powi(2).exp());
        let scale = 1.0 / norm2.sqrt();
        h.iter_mut().for_each(|x| *x *= scale);
        let kernel = shell_kernel(d, 0.0);
        let psi_nodes = self.grid.nodes.iter().map(|&r| self.grid.apply(r, &kernel, &h)).collect();
        Ok(GroundState {
            beta_cr,
            h0: h,
            psi_nodes,
            nodes: self.grid.nodes.clone(),
        })
    }

    /// `(−R₀(λ) h)(r)` for nodal data h.
    pub fn apply_resolvent(&self, lambda: f64, h: &[f64], r: f64) -> f64 {
        self.grid.apply(r, shell_kernel(self.dimension(), lambda), h)
    }

    /// ψ sampled on `r`.
    pub fn ground_state_field(&self, gs: &GroundState, r: Vec<f64>) -> RadialField {
        let kernel = shell_kernel(self.dimension(), 0.0);
        RadialField::from_fn(self.dimension(), r, |x| self.grid.apply(x, &kernel, &gs.h0))
    }

    /// ψ_β = −R₀(λ₀) h_{λ₀}, positive with unit L² norm.
    pub fn eigenfunction(&self, beta: f64) -> Result<Eigenfunction> {
        let d = self.dimension();
        let lambda0 = self.lambda0(beta)?;
        if !(lambda0 > 0.0) {
            return Err(invalid("beta", format!("{beta} does not exceed the critical coupling")));
        }
        let (_, h) = self.principal(lambda0)?;
        let kappa = (2.0 * lambda0).sqrt();
        let radius = self.grid.radius;
        let gl = GaussLegendre::new(32);
        let kernel = shell_kernel(d, lambda0);
        let unscaled = |r: f64| self.grid.apply(r, &kernel, &h);
        // Panels: the support, then geometric panels until e^{−2κr} is negligible.
        let mut breaks = vec![0.0, radius];
        let tail = radius + 40.0 / kappa;
        let mut step = radius.min(1.0 / kappa);
        while *breaks.last().unwrap() < tail {
            let next = breaks.last().unwrap() + step;
            breaks.push(next);
            step *= 1.5;
        }
        let norm2 = d.sphere_area()
            * gl.integrate_panels(&breaks, |r| unscaled(r).powi(2) * d.radial_weight(r));
        let scale = 1.0 / norm2.sqrt();
        Ok(Eigenfunction {
            beta,
            lambda0,
            h: h.iter().map(|x| x * scale).collect(),
            owner_scale: scale,
        })
    }

    /// Samples an eigenfunction on `r`.
    pub fn eigenfunction_field(&self, ef: &Eigenfunction, r: Vec<f64>) -> RadialField {
        let kernel = shell_kernel(self.dimension(), ef.lambda0);
        RadialField::from_fn(self.dimension(), r, |x| self.grid.apply(x, &kernel, &ef.h))
    }

    pub fn eigenfunction_at(&self, ef: &Eigenfunction, r: f64) -> f64 {
        self.grid.apply(r, shell_kernel(self.dimension(), ef.lambda0), &ef.h)
    }

    /// `∫_{ℝ^d} ψ_β dx`.
    pub fn eigenfunction_l1(&self, ef: &Eigenfunction) -> f64 {
        let d = self.dimension();
        let kappa = (2.0 * ef.lambda0).sqrt();
        let radius = self.grid.radius;
        let gl = GaussLegendre::new(32);
        let mut breaks = vec![0.0, radius];
        let tail = radius + 60.0 / kappa;
        let mut step = radius.min(1.0 / kappa);
        while *breaks.last().unwrap() < tail {
            let next = breaks.last().unwrap() + step;
            breaks.push(next);
            step *= 1.5;
        }
        d.sphere_area() * gl.integrate_panels(&breaks, |r| self.eigenfunction_at(ef, r) * d.radial_weight(r))
    }

    /// γ for d = 3 from ψ: `(∫vψ)² / (√2 π ∫vψ²)`.
    pub fn gamma_constant(&self, gs: &GroundState) -> Result<f64> {
        if self.dimension().get() != 3 {
            return Err(invalid("d", "the ψ form of γ is defined for d = 3 only"));
        }
        let v = |i: usize| self.potential.value(self.grid.nodes[i]);
        let a = self.grid.integrate(|i| v(i) * gs.psi_nodes[i]);
        let b = self.grid.integrate(|i| v(i) * gs.psi_nodes[i].powi(2));
        Ok(a * a / (2f64.sqrt() * PI * b))
    }

    /// γ = −⟨v Q_d h₀, h₀*⟩ / ⟨h₀, h₀*⟩ in L²(e^{|x|²}dx) with
    /// `v e^{|x|²} h₀* = h₀`, for d = 3, 4, 5.
    pub fn gamma_general(&self, gs: &GroundState) -> Result<f64> {
        let d = self.dimension().require_transient()?;
        let g = &self.grid;
        let h = &gs.h0;
        let vals: Vec<f64> = g.nodes.iter().map(|&r| self.potential.value(r)).collect();
        let denom = g.integrate(|i| if vals[i] > 0.0 { h[i] * h[i] / vals[i] } else { 0.0 });
        let mass = g.integrate(|i| h[i]);
        let numer = match d.get() {
            3 => mass * mass / (2f64.sqrt() * PI),
            4 => mass * mass / (4.0 * PI * PI),
            5 => {
                let a5 = zero_energy_coefficient(d)?;
                let inner: Vec<f64> = g
                    .nodes
                    .iter()
                    .map(|&r| g.apply(r, shell_inverse_distance_r5, h))
                    .collect();
                a5 * g.integrate(|i| h[i] * inner[i])
            }
            _ => unreachable!(),
        };
        Ok(numer / denom)
    }

    /// κ = 1/(√(2π) β_cr ∫vψ), d = 3.
    pub fn kappa(&self, gs: &GroundState) -> Result<f64> {
        if self.dimension().get() != 3 {
            return Err(invalid("d", "κ is defined for d = 3 only"));
        }
        let mass = self
            .grid
            .integrate(|i| self.potential.value(self.grid.nodes[i]) * gs.psi_nodes[i]);
        Ok(1.0 / ((2.0 * PI).sqrt() * gs.beta_cr * mass))
    }

    pub fn scaling_constants(&self) -> Result<ScalingConstants> {
        let d = self.dimension();
        let c1 = self.potential.integral();
        let mut out = ScalingConstants {
            dimension: d,
            c_d: 0.0,
            c1,
            gamma: None,
            kappa: None,
        };
        match d.get() {
            1 => out.c_d = c1,
            2 => out.c_d = PI / c1,
            _ => {
                let gs = self.ground_state()?;
                let gamma = self.gamma_general(&gs)?;
                out.gamma = Some(gamma);
                out.c_d = match d.get() {
                    3 => 1.0 / (gamma * gamma * gs.beta_cr.powi(4)),
                    _ => 1.0 / (gamma * gs.beta_cr * gs.beta_cr),
                };
                if d.get() == 3 {
                    out.kappa = Some(self.kappa(&gs)?);
                }
            }
        }
        Ok(out)
    }

    /// φ_β = R₀(0)(I + βA(0))⁻¹(−βv) for 0 ≤ β < β_cr, d ≥ 3.
    pub fn phi_beta(&self, beta: f64) -> Result<Corrector> {
        let d = self.dimension().require_transient()?;
        let beta_cr = self.critical_beta()?;
        if !(beta >= 0.0) || beta >= beta_cr {
            return Err(invalid("beta", format!("need 0 <= beta < beta_cr = {beta_cr}, got {beta}")));
        }
        if (beta_cr - beta) <= 1e-10 * beta_cr {
            return Err(Error::SingularSystem { row: 0, pivot: beta_cr - beta });
        }
        let op = self.assemble(0.0)?;
        let n = op.nodes.len();
        let mut sys = op.matrix.scaled(beta);
        for i in 0..n {
            sys.set(i, i, sys.get(i, i) + 1.0);
        }
        let rhs: Vec<f64> = op.potential_at_nodes.iter().map(|v| -beta * v).collect();
        let g = Lu::factor(sys)?.solve(&rhs);
        let _ = d;
        Ok(Corrector { beta, g })
    }

    pub fn phi_at(&self, phi: &Corrector, r: f64) -> f64 {
        -self.apply_resolvent(0.0, &phi.g, r)
    }

    pub fn phi_field(&self, phi: &Corrector, r: Vec<f64>) -> RadialField {
        RadialField::from_fn(self.dimension(), r, |x| self.phi_at(phi, x))
    }

    /// Adjoint eigenvector `h* = h / (v e^{|x|²})` on the support, zero outside.
    pub fn adjoint_eigenvector(&self, h: &[f64]) -> Vec<f64> {
        self.grid
            .nodes
            .iter()
            .zip(h)
            .map(|(&r, &hi)| {
                let v = self.potential.value(r);
                if v > 0.0 {
                    hi / (v * (r * r).exp())
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// `∫_{ℝ^d} f` for nodal samples.
    pub fn integrate_nodes(&self, f: &[f64]) -> f64 {
        self.grid.integrate(|i| f[i])
    }

    /// Full spectral summary: β_cr, λ₀ on `betas`, ψ on `psi_radii` (d ≥ 3), constants.
    pub fn solve(&self, betas: &[f64], psi_radii: Vec<f64>) -> Result<SpectralSolution> {
        let d = self.dimension();
        let beta_cr = self.critical_beta()?;
        let lambda0_table = betas
            .iter()
            .map(|&b| Ok(LambdaEntry { beta: b, lambda0: self.lambda0(b)? }))
            .collect::<Result<Vec<_>>>()?;
        let constants = self.scaling_constants()?;
        let psi_grid = if d.get() >= 3 {
            let gs = self.ground_state()?;
            let f = self.ground_state_field(&gs, psi_radii);
            Some(GridSamples { r: f.r, value: f.value })
        } else {
            None
        };
        Ok(SpectralSolution {
            d,
            beta_cr,
            lambda0_table,
            psi_grid,
            gamma: constants.gamma,
            c_d: constants.c_d,
            kappa: constants.kappa,
        })
    }
}

/// ψ_β in nodal form; evaluate with [`BirmanSchwinger::eigenfunction_at`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Eigenfunction {
    pub beta: f64,
    pub lambda0: f64,
    /// h_{λ₀} scaled so that −R₀(λ₀)h has unit L² norm.
    pub h: Vec<f64>,
    owner_scale: f64,
}

/// φ_β in nodal form: φ = −(shell operator) g.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Corrector {
    pub beta: f64,
    pub g: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingConstants {
    pub dimension: Dimension,
    /// c₁ for d = 1, c₂ for d = 2, c_d otherwise.
    pub c_d: f64,
    /// `∫ v`.
    pub c1: f64,
    pub gamma: Option<f64>,
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaEntry {
    pub beta: f64,
    pub lambda0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSamples {
    pub r: Vec<f64>,
    pub value: Vec<f64>,
}

/// Serialized spectral summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralSolution {
    pub d: Dimension,
    pub beta_cr: f64,
    pub lambda0_table: Vec<LambdaEntry>,
    pub psi_grid: Option<GridSamples>,
    pub gamma: Option<f64>,
    pub c_d: f64,
    pub kappa: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn well3() -> RadialPotential {
        RadialPotential::unit_well(Dimension::THREE)
    }

    #[test]
    fn rejects_too_few_nodes() {
        assert!(assemble_operator(&well3(), 0.0, 4).is_err());
    }

    #[test]
    fn d1_and_d2_have_zero_critical_coupling() {
        let v = RadialPotential::unit_well(Dimension::ONE);
        assert_eq!(critical_beta(&v, Resolution::new(16)).unwrap().value, 0.0);
        assert!(assemble_operator(&v, 0.0, 16).is_err());
    }

    #[test]
    fn off_diagonal_entries_positive_at_zero_energy() {
        let op = assemble_operator(&well3(), 0.0, 32).unwrap();
        assert!(op.matrix.entries().iter().all(|&m| m < 0.0));
    }

    #[test]
    fn linear_in_potential() {
        let v = well3();
        let a = assemble_operator(&v, 0.3, 16).unwrap();
        let b = assemble_operator(&v.scaled(2.0).unwrap(), 0.3, 16).unwrap();
        for (x, y) in a.matrix.entries().iter().zip(b.matrix.entries()) {
            assert_eq!(2.0 * x, *y);
        }
    }

    #[test]
    fn lambda0_zero_at_or_below_critical() {
        let bs = BirmanSchwinger::new(well3(), Resolution::new(16)).unwrap();
        let bc = bs.critical_beta().unwrap();
        assert_eq!(bs.lambda0(bc).unwrap(), 0.0);
        assert_eq!(bs.lambda0(0.5 * bc).unwrap(), 0.0);
        assert!(bs.lambda0(-1.0).is_err());
    }

    #[test]
    fn phi_rejects_supercritical_and_vanishes_at_zero() {
        let bs = BirmanSchwinger::new(well3(), Resolution::new(16)).unwrap();
        assert!(bs.phi_beta(2.0).is_err());
        let phi = bs.phi_beta(0.0).unwrap();
        assert!(phi.g.iter().all(|&g| g == 0.0));
        assert_eq!(bs.phi_at(&phi, 0.5), 0.0);
    }

    #[test]
    fn gamma_forms_agree_in_three_dimensions() {
        let bs = BirmanSchwinger::new(well3(), Resolution::new(24)).unwrap();
        let gs = bs.ground_state().unwrap();
        let a = bs.gamma_constant(&gs).unwrap();
        let b = bs.gamma_general(&gs).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
        let bs5 = BirmanSchwinger::new(RadialPotential::unit_well(Dimension::FIVE), Resolution::new(16)).unwrap();
        let gs5 = bs5.ground_state().unwrap();
        assert!(bs5.gamma_constant(&gs5).is_err());
    }
}
