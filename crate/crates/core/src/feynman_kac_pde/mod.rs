//! Radial Feynman–Kac evolution `∂u/∂t = ½Δu + βv u`.
//!
//! Finite volumes on a radial grid: node i owns the shell between the
//! midpoints to its neighbours (the origin cell has no inner face), so
//! `Σ vol_i u_i` is conserved exactly at β = 0 with a reflecting boundary.
//! Time stepping is Crank–Nicolson with implicit-Euler start-up half-steps,
//! on a step that grows in proportion to t.

mod fit;
mod grid;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use fit::{asymptotic_fit, lyapunov_exponent, FitModel, FitResult, LyapunovFit};
pub use grid::{RadialGrid, Spacing};

use crate::dimension::Dimension;
use crate::error::{invalid, Error, Result};
use crate::field::RadialField;
use crate::linalg::solve_tridiagonal;
use crate::potential::RadialPotential;
use crate::quadrature::{lerp, GaussLegendre};

/// Condition at `R_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Zero flux.
    Reflecting,
    /// `u(R_max) = 0`.
    Absorbing,
    /// `u' = −(d−2)u/R`, exact for harmonic tails; d ≥ 3.
    Exterior,
}

/// Step-size rule `dt = max(dt0, growth · t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stepping {
    pub dt0: f64,
    pub growth: f64,
    /// Leading steps replaced by two implicit-Euler half-steps each.
    pub startup_steps: usize,
}

impl Default for Stepping {
    fn default() -> Self {
        Self {
            dt0: 0.01,
            growth: 0.01,
            startup_steps: 2,
        }
    }
}

impl Stepping {
    fn validate(&self) -> Result<()> {
        if !(self.dt0 > 0.0) || !self.dt0.is_finite() {
            return Err(invalid("dt0", format!("must be positive, got {}", self.dt0)));
        }
        if !(self.growth >= 0.0) || self.growth > 0.5 {
            return Err(invalid("growth", format!("must lie in [0, 0.5], got {}", self.growth)));
        }
        Ok(())
    }
}

/// What to record during an evolution.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputPlan {
    /// Increasing sample times; the last one is t_end.
    pub times: Vec<f64>,
    /// Radii at which u is recorded at every sample time.
    pub probes: Vec<f64>,
    /// Keep the full radial field at each sample time.
    pub keep_fields: bool,
}

impl OutputPlan {
    pub fn new(times: Vec<f64>) -> Self {
        Self {
            times,
            probes: vec![0.0],
            keep_fields: false,
        }
    }

    pub fn with_probes(mut self, probes: Vec<f64>) -> Self {
        self.probes = probes;
        self
    }

    pub fn with_fields(mut self) -> Self {
        self.keep_fields = true;
        self
    }

    /// `n` log-spaced times on `[t0, t1]`.
    pub fn log_spaced(t0: f64, t1: f64, n: usize) -> Self {
        let (a, b) = (t0.ln(), t1.ln());
        let times = (0..n)
            .map(|i| (a + (b - a) * i as f64 / (n.max(2) - 1) as f64).exp())
            .collect();
        Self::new(times)
    }

    /// `n` equally spaced times on `[t0, t1]`.
    pub fn linear(t0: f64, t1: f64, n: usize) -> Self {
        let times = (0..n).map(|i| t0 + (t1 - t0) * i as f64 / (n.max(2) - 1) as f64).collect();
        Self::new(times)
    }

    fn t_end(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    /// Full fields, present when requested.
    pub fields: Vec<RadialField>,
    pub probes: Vec<f64>,
    /// `probe_values[k][j]` is u(times[j], probes[k]).
    pub probe_values: Vec<Vec<f64>>,
    pub steps: usize,
}

impl EvolutionResult {
    pub fn series(&self, probe: usize) -> &[f64] {
        &self.probe_values[probe]
    }

    pub fn final_field(&self) -> Option<&RadialField> {
        self.fields.last()
    }

    /// Time series as CSV: `t, u(r_1), …` after a `#` header line.
    pub fn to_csv(&self, header: &str) -> String {
        let mut s = format!("# {header}\nt");
        for r in &self.probes {
            let _ = write!(s, ",u_r{r}");
        }
        s.push('\n');
        for (j, t) in self.times.iter().enumerate() {
            let _ = write!(s, "{t}");
            for series in &self.probe_values {
                let _ = write!(s, ",{}", series[j]);
            }
            s.push('\n');
        }
        s
    }
}

/// Radial snapshot as CSV.
pub fn snapshot_csv(field: &RadialField, header: &str) -> String {
    let mut s = format!("# {header}\nr,u\n");
    for (r, u) in field.r.iter().zip(&field.value) {
        let _ = writeln!(s, "{r},{u}");
    }
    s
}

/// Discrete operator `L = ½Δ + βV` in tridiagonal form.
#[derive(Debug, Clone)]
struct Tridiagonal {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl Tridiagonal {
    fn apply(&self, u: &[f64], out: &mut [f64]) {
        let n = u.len();
        for i in 0..n {
            let mut s = self.diag[i] * u[i];
            if i > 0 {
                s += self.lower[i] * u[i - 1];
            }
            if i + 1 < n {
                s += self.upper[i] * u[i + 1];
            }
            out[i] = s;
        }
    }
}

/// Cell averages of v over the finite volumes of `grid`.
fn cell_average(grid: &RadialGrid, v: &RadialPotential) -> Vec<f64> {
    let gl = GaussLegendre::new(8);
    let d = grid.dimension();
    let mut kinks = v.breakpoints();
    kinks.push(v.support_radius());
    grid.faces()
        .windows(2)
        .zip(grid.volumes())
        .map(|(f, &vol)| {
            let (a, b) = (f[0], f[1]);
            if a >= v.support_radius() {
                return 0.0;
            }
            let mut breaks = vec![a];
            breaks.extend(kinks.iter().copied().filter(|&k| k > a && k < b));
            breaks.push(b);
            gl.integrate_panels(&breaks, |r| v.value(r) * d.radial_weight(r)) / vol
        })
        .collect()
}

fn build_operator(grid: &RadialGrid, vbar: &[f64], beta: f64, boundary: Boundary) -> Tridiagonal {
    let n = grid.len();
    let vol = grid.volumes();
    let c = grid.conductances();
    let mut lower = vec![0.0; n];
    let mut diag: Vec<f64> = vbar.iter().map(|v| beta * v).collect();
    let mut upper = vec![0.0; n];
    for (i, &ci) in c.iter().enumerate() {
        diag[i] -= 0.5 * ci / vol[i];
        upper[i] += 0.5 * ci / vol[i];
        diag[i + 1] -= 0.5 * ci / vol[i + 1];
        lower[i + 1] += 0.5 * ci / vol[i + 1];
    }
    let last = n - 1;
    match boundary {
        Boundary::Reflecting => {}
        Boundary::Absorbing => {
            lower[last] = 0.0;
            diag[last] = 0.0;
        }
        Boundary::Exterior => {
            let d = grid.dimension();
            let rr = grid.r_max();
            diag[last] -= 0.5 * d.radial_weight(rr) * (d.as_f64() - 2.0) / rr / vol[last];
        }
    }
    Tridiagonal { lower, diag, upper }
}

/// Solver configuration shared by all evolutions on one grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeConfig {
    pub grid: RadialGrid,
    pub boundary: Boundary,
    pub stepping: Stepping,
}

impl PdeConfig {
    pub fn new(grid: RadialGrid) -> Self {
        Self {
            grid,
            boundary: Boundary::Reflecting,
            stepping: Stepping::default(),
        }
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_stepping(mut self, stepping: Stepping) -> Self {
        self.stepping = stepping;
        self
    }

    /// Latest time before the boundary is felt at the origin: `(R_max/4)²`.
    pub fn contamination_time(&self) -> f64 {
        (self.grid.r_max() / 4.0).powi(2)
    }
}

/// Evolution of `∂u/∂t = ½Δu + βv u` for one potential and coupling.
#[derive(Debug, Clone)]
pub struct FeynmanKac {
    config: PdeConfig,
    beta: f64,
    sup_v: f64,
    vbar: Vec<f64>,
    op: Tridiagonal,
}

impl FeynmanKac {
    pub fn new(v: &RadialPotential, beta: f64, config: PdeConfig) -> Result<Self> {
        if v.dimension() != config.grid.dimension() {
            return Err(invalid("d", "potential and grid dimensions differ"));
        }
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(invalid("beta", format!("must be finite and >= 0, got {beta}")));
        }
        if config.grid.r_max() < 4.0 * v.support_radius() {
            return Err(invalid("grid", "R_max must be at least 4 R_supp"));
        }
        if config.boundary == Boundary::Exterior && config.grid.dimension().get() < 3 {
            return Err(invalid("boundary", "exterior condition needs d >= 3"));
        }
        config.stepping.validate()?;
        let vbar = cell_average(&config.grid, v);
        let op = build_operator(&config.grid, &vbar, beta, config.boundary);
        Ok(Self {
            config,
            beta,
            sup_v: v.sup(),
            vbar,
            op,
        })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.config.grid
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Cell averages of v.
    pub fn potential_cells(&self) -> &[f64] {
        &self.vbar
    }

    /// Evolves `init` (nodal values) and records `plan`.
    pub fn evolve(&self, init: &[f64], plan: &OutputPlan) -> Result<EvolutionResult> {
        let grid = &self.config.grid;
        let n = grid.len();
        if init.len() != n {
            return Err(invalid("init", format!("expected {n} values, got {}", init.len())));
        }
        if init.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(invalid("init", "initial data must be finite and nonnegative"));
        }
        if plan.times.is_empty() || plan.times[0] < 0.0 || plan.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("times", "sample times must be nonnegative and increasing"));
        }
        if plan.t_end() > self.config.contamination_time() && self.config.boundary != Boundary::Exterior {
            return Err(invalid(
                "grid",
                format!(
                    "R_max = {} is below 4·sqrt(t_end) = {}",
                    grid.r_max(),
                    4.0 * plan.t_end().sqrt()
                ),
            ));
        }
        if let Some(&p) = plan.probes.iter().find(|&&p| !(0.0..=grid.r_max()).contains(&p)) {
            return Err(invalid("probes", format!("probe radius {p} outside the grid")));
        }

        let mut u = init.to_vec();
        if self.config.boundary == Boundary::Absorbing {
            u[n - 1] = 0.0;
        }
        let u_max0 = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let rate = self.beta * self.sup_v + 1.0;
        let mut out = EvolutionResult {
            times: Vec::with_capacity(plan.times.len()),
            fields: Vec::new(),
            probes: plan.probes.clone(),
            probe_values: vec![Vec::with_capacity(plan.times.len()); plan.probes.len()],
            steps: 0,
        };
        let mut work = Workspace::new(n);
        let mut t = 0.0;
        for &target in &plan.times {
            while t < target {
                let mut dt = self.config.stepping.dt0.max(self.config.stepping.growth * t);
                // Avoid a sliver step just before the target.
                if t + 1.5 * dt >= target {
                    dt = target - t;
                }
                if out.steps < self.config.stepping.startup_steps {
                    self.implicit_euler(&mut u, 0.5 * dt, &mut work);
                    self.implicit_euler(&mut u, 0.5 * dt, &mut work);
                } else {
                    self.crank_nicolson(&mut u, dt, &mut work);
                }
                t = if dt == target - t { target } else { t + dt };
                out.steps += 1;
                let max_abs = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                let bound = u_max0 * (rate * t).exp() * (1.0 + 1e-6) + 1e-300;
                if !max_abs.is_finite() || max_abs > bound {
                    return Err(Error::Instability { t, max_abs, bound });
                }
            }
            out.times.push(target);
            for (k, &p) in plan.probes.iter().enumerate() {
                out.probe_values[k].push(lerp(grid.r(), &u, p));
            }
            if plan.keep_fields {
                out.fields.push(RadialField::new(grid.dimension(), grid.r().to_vec(), u.clone()));
            }
        }
        Ok(out)
    }

    fn crank_nicolson(&self, u: &mut [f64], dt: f64, w: &mut Workspace) {
        let op = &self.op;
        op.apply(u, &mut w.lu);
        for i in 0..u.len() {
            w.rhs[i] = u[i] + 0.5 * dt * w.lu[i];
            w.lower[i] = -0.5 * dt * op.lower[i];
            w.diag[i] = 1.0 - 0.5 * dt * op.diag[i];
            w.upper[i] = -0.5 * dt * op.upper[i];
        }
        self.finish_step(u, w);
    }

    fn implicit_euler(&self, u: &mut [f64], dt: f64, w: &mut Workspace) {
        let op = &self.op;
        for i in 0..u.len() {
            w.rhs[i] = u[i];
            w.lower[i] = -dt * op.lower[i];
            w.diag[i] = 1.0 - dt * op.diag[i];
            w.upper[i] = -dt * op.upper[i];
        }
        self.finish_step(u, w);
    }

    fn finish_step(&self, u: &mut [f64], w: &mut Workspace) {
        if self.config.boundary == Boundary::Absorbing {
            let last = u.len() - 1;
            w.rhs[last] = 0.0;
            w.lower[last] = 0.0;
            w.diag[last] = 1.0;
        }
        solve_tridiagonal(&w.lower, &w.diag, &w.upper, &mut w.rhs, &mut w.scratch);
        u.copy_from_slice(&w.rhs);
    }

    /// `Z_{β,t}(x)`: evolution of initial data ≡ 1.
    pub fn partition_function(&self, plan: &OutputPlan) -> Result<EvolutionResult> {
        self.evolve(&vec![1.0; self.grid().len()], plan)
    }

    /// `p_β(t, y, ·)` averaged over the directions of y. The delta is a
    /// Gaussian of width three local spacings, discretely normalized.
    pub fn fundamental_solution(&self, y: f64, plan: &OutputPlan) -> Result<EvolutionResult> {
        let init = self.grid().delta(y)?;
        self.evolve(&init, plan)
    }

    /// `∫_{ℝ^d} u dx` for nodal data.
    pub fn mass(&self, u: &[f64]) -> f64 {
        self.grid().integrate(u)
    }
}

struct Workspace {
    lu: Vec<f64>,
    rhs: Vec<f64>,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    scratch: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            lu: vec![0.0; n],
            rhs: vec![0.0; n],
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
            scratch: Vec::with_capacity(n),
        }
    }
}

/// Critical coupling of the discrete operator: the smallest β with
/// `−L₀u = βVu` solvable, by inverse iteration with the exterior condition.
pub fn grid_critical_beta(v: &RadialPotential, grid: &RadialGrid) -> Result<f64> {
    let d = grid.dimension().require_transient()?;
    if v.dimension() != d {
        return Err(invalid("d", "potential and grid dimensions differ"));
    }
    let vbar = cell_average(grid, v);
    let op = build_operator(grid, &vbar, 0.0, Boundary::Exterior);
    let lower: Vec<f64> = op.lower.iter().map(|x| -x).collect();
    let diag: Vec<f64> = op.diag.iter().map(|x| -x).collect();
    let upper: Vec<f64> = op.upper.iter().map(|x| -x).collect();
    let mut u: Vec<f64> = vbar.iter().map(|&x| if x > 0.0 { 1.0 } else { 0.0 }).collect();
    let mut scratch = Vec::with_capacity(u.len());
    let mut mu_prev = f64::NAN;
    for it in 0..10_000 {
        let mut w: Vec<f64> = vbar.iter().zip(&u).map(|(a, b)| a * b).collect();
        solve_tridiagonal(&lower, &diag, &upper, &mut w, &mut scratch);
        let wmax = w.iter().fold(0.0f64, |m, x| m.max(*x));
        let umax = u.iter().fold(0.0f64, |m, x| m.max(*x));
        let mu = wmax / umax;
        u = w.into_iter().map(|x| x / wmax).collect();
        if (mu - mu_prev).abs() <= 1e-15 * mu {
            return Ok(1.0 / mu);
        }
        mu_prev = mu;
        if it == 9_999 {
            break;
        }
    }
    Err(Error::NoConvergence {
        method: "inverse iteration",
        iterations: 10_000,
        residual: f64::NAN,
    })
}

/// Free Gaussian radial profile in dimension d at time t, for tests and seeds.
pub fn free_heat_profile(d: Dimension, t: f64, r: &[f64]) -> Vec<f64> {
    r.iter()
        .map(|&x| (2.0 * std::f64::consts::PI * t).powf(-0.5 * d.as_f64()) * (-x * x / (2.0 * t)).exp())
        .collect()
}
