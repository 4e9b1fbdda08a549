//! Critical-scaling limit in d = 3 on the time interval [0, 1].
//!
//! `p̄(s,t,y,x) = p₀(τ,y,x) + (2π)^{−3/2}(|y||x|√τ)^{−1} e^{−(|y|+|x|)²/2τ}`,
//! τ = t − s. Its mass `∫p̄(t,1,x,z)dz = 1 + m(|x|, 1−t)` has the closed form
//! `m(r,τ) = √(2τ/π) e^{−r²/2τ}/r − erfc(r/√(2τ))`, and
//! `Q(s,t,y,x) = p̄(s,t,y,x) e^{g(t,x) − g(s,y)}` with `g = ln(1 + m)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{invalid, Result};
use crate::quadrature::GaussLegendre;

pub type Vec3 = [f64; 3];

fn norm(x: &Vec3) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dist2(x: &Vec3, y: &Vec3) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum()
}

/// Free heat kernel `p₀(τ, y, x)` in ℝ³.
pub fn heat_kernel_3d(tau: f64, y: &Vec3, x: &Vec3) -> f64 {
    (2.0 * PI * tau).powf(-1.5) * (-dist2(x, y) / (2.0 * tau)).exp()
}

/// Average of `p₀(τ, y, ·)` over the sphere of radius `rho`, for `|y| = r`.
pub fn heat_kernel_shell_average(tau: f64, r: f64, rho: f64) -> f64 {
    let a = r * rho / tau;
    let base = (2.0 * PI * tau).powf(-1.5) * (-(r - rho).powi(2) / (2.0 * tau)).exp();
    if a < 1e-12 {
        return base * (1.0 - a);
    }
    base * -(-2.0 * a).exp_m1() / (2.0 * a)
}

/// Second term of p̄, a function of the radii only.
pub fn radial_term(tau: f64, r: f64, rho: f64) -> f64 {
    (2.0 * PI).powf(-1.5) / (r * rho * tau.sqrt()) * (-(r + rho).powi(2) / (2.0 * tau)).exp()
}

/// `m(r, τ) = ∫_{ℝ³}` of the second term of p̄ over its second argument.
pub fn excess_mass(r: f64, tau: f64) -> f64 {
    if tau == 0.0 {
        return 0.0;
    }
    let z = r / (2.0 * tau).sqrt();
    (2.0 * tau / PI).sqrt() * (-z * z).exp() / r - libm::erfc(z)
}

/// `g(t, x) = ln ∫ p̄(t, 1, x, z) dz` for |x| = r > 0.
pub fn g_log_mass(t: f64, r: f64) -> Result<f64> {
    check_time(t)?;
    check_radius(r)?;
    Ok(excess_mass(r, 1.0 - t).ln_1p())
}

/// `∂g/∂r`.
pub fn drift_field(t: f64, r: f64) -> Result<f64> {
    check_time(t)?;
    check_radius(r)?;
    let tau = 1.0 - t;
    let e = (2.0 * tau / PI).sqrt() * (-r * r / (2.0 * tau)).exp();
    Ok(-(e / (r * r)) / (1.0 + excess_mass(r, tau)))
}

fn check_time(t: f64) -> Result<()> {
    if !(0.0..1.0).contains(&t) {
        return Err(invalid("t", format!("must lie in [0, 1), got {t}")));
    }
    Ok(())
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(invalid("r", format!("must be positive, got {r} (the drift is singular at 0)")));
    }
    Ok(())
}

fn check_interval(s: f64, t: f64) -> Result<()> {
    if !(0.0 <= s && s < t && t <= 1.0) {
        return Err(invalid("times", format!("need 0 <= s < t <= 1, got s={s}, t={t}")));
    }
    Ok(())
}

/// Evaluator of p̄ and Q. `kappa_psi0` is κψ(0) of a concrete potential; it
/// enters p̄ from the origin and cancels in Q.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalKernel {
    pub kappa_psi0: f64,
    /// Gauss–Legendre points per radial panel.
    pub nodes: usize,
}

impl CriticalKernel {
    pub fn new(kappa_psi0: f64) -> Self {
        Self { kappa_psi0, nodes: 64 }
    }

    /// Doubles the quadrature resolution.
    pub fn refined(self) -> Self {
        Self {
            nodes: 2 * self.nodes,
            ..self
        }
    }

    pub fn pbar(&self, s: f64, t: f64, y: &Vec3, x: &Vec3) -> Result<f64> {
        if !(s < t) {
            return Err(invalid("times", format!("need s < t, got s={s}, t={t}")));
        }
        let rx = norm(x);
        if rx == 0.0 {
            return Err(invalid("x", "must be nonzero"));
        }
        Ok(self.pbar_unchecked(t - s, y, x))
    }

    fn pbar_unchecked(&self, tau: f64, y: &Vec3, x: &Vec3) -> f64 {
        let (ry, rx) = (norm(y), norm(x));
        if ry == 0.0 {
            self.kappa_psi0 * (-rx * rx / (2.0 * tau)).exp() / (rx * tau.sqrt())
        } else {
            heat_kernel_3d(tau, y, x) + radial_term(tau, ry, rx)
        }
    }

    /// p̄ averaged over directions of x at |x| = rho.
    pub fn pbar_shell_average(&self, tau: f64, ry: f64, rho: f64) -> f64 {
        if ry == 0.0 {
            self.kappa_psi0 * (-rho * rho / (2.0 * tau)).exp() / (rho * tau.sqrt())
        } else {
            heat_kernel_shell_average(tau, ry, rho) + radial_term(tau, ry, rho)
        }
    }

    /// `∫ p̄(s, 1, y, z) dz`.
    pub fn mass(&self, s: f64, ry: f64) -> f64 {
        let tau = 1.0 - s;
        if ry == 0.0 {
            4.0 * PI * self.kappa_psi0 * tau.sqrt()
        } else {
            1.0 + excess_mass(ry, tau)
        }
    }

    /// `Q(s, t, y, x)`; zero at x = 0.
    pub fn critical_q(&self, s: f64, t: f64, y: &Vec3, x: &Vec3) -> Result<f64> {
        check_interval(s, t)?;
        let rx = norm(x);
        if rx == 0.0 {
            return Ok(0.0);
        }
        Ok(self.pbar_unchecked(t - s, y, x) * (1.0 + excess_mass(rx, 1.0 - t)) / self.mass(s, norm(y)))
    }

    /// Q averaged over directions of x at |x| = rho.
    fn q_shell_average(&self, s: f64, t: f64, ry: f64, rho: f64) -> f64 {
        self.pbar_shell_average(t - s, ry, rho) * (1.0 + excess_mass(rho, 1.0 - t)) / self.mass(s, ry)
    }

    /// Radial panels covering the Gaussian extent around the given radii.
    fn radial_panels(&self, radii: &[f64], tau: f64) -> Vec<f64> {
        let reach = radii.iter().copied().fold(0.0, f64::max) + 14.0 * tau.sqrt();
        // Graded near the origin, where Q ~ c/r².
        let mut breaks = vec![0.0];
        let mut b = 1e-6;
        while b < 0.25 {
            breaks.push(b);
            b *= 4.0;
        }
        let step = 0.25;
        let mut b = 0.25;
        while b < reach {
            breaks.push(b);
            b += step;
        }
        breaks.push(reach.max(b));
        breaks
    }

    /// `∫ Q(s, t, y, x) dx`, |y| = ry.
    pub fn normalization(&self, s: f64, t: f64, ry: f64) -> Result<f64> {
        check_interval(s, t)?;
        let gl = GaussLegendre::new(self.nodes);
        let breaks = self.radial_panels(&[ry], t - s);
        Ok(4.0 * PI * gl.integrate_panels(&breaks, |rho| rho * rho * self.q_shell_average(s, t, ry, rho)))
    }

    /// `∫ Q(t1, t2, x1, z) Q(t2, t3, z, x3) dz`. Directions of z are integrated in
    /// closed form; the radius by Gauss–Legendre panels.
    pub fn chapman_kolmogorov(&self, t: (f64, f64, f64), x1: &Vec3, x3: &Vec3) -> Result<f64> {
        let (t1, t2, t3) = t;
        check_interval(t1, t2)?;
        check_interval(t2, t3)?;
        let (a, b) = (t2 - t1, t3 - t2);
        let (r1, r3) = (norm(x1), norm(x3));
        if r3 == 0.0 {
            return Ok(0.0);
        }
        let w: Vec3 = std::array::from_fn(|k| x1[k] / a + x3[k] / b);
        let wn = norm(&w);
        let base = (2.0 * PI * a).powf(-1.5) * (2.0 * PI * b).powf(-1.5);
        // ∫_{|z|=ρ} p₀(a, x1, z) p₀(b, z, x3) dσ(z) / ρ².
        let both_heat = |rho: f64| -> f64 {
            let expo = -r1 * r1 / (2.0 * a) - r3 * r3 / (2.0 * b) - 0.5 * rho * rho * (1.0 / a + 1.0 / b);
            let q = rho * wn;
            let sinhc = if q < 1e-8 { (expo + q).exp() * (1.0 - q) } else { (expo + q).exp() * -(-2.0 * q).exp_m1() / (2.0 * q) };
            4.0 * PI * base * sinhc
        };
        let gl = GaussLegendre::new(self.nodes);
        let breaks = self.radial_panels(&[r1, r3], a.max(b));
        let integral = if r1 == 0.0 {
            // p̄ from the origin is radial in z.
            gl.integrate_panels(&breaks, |rho| {
                let first = self.kappa_psi0 * (-rho * rho / (2.0 * a)).exp() / (rho * a.sqrt());
                let second = heat_kernel_shell_average(b, r3, rho) + radial_term(b, rho, r3);
                4.0 * PI * rho * rho * first * second * self.factor(t, r1, rho, r3)
            })
        } else {
            gl.integrate_panels(&breaks, |rho| {
                let terms = both_heat(rho)
                    + 4.0 * PI * heat_kernel_shell_average(a, r1, rho) * radial_term(b, rho, r3)
                    + 4.0 * PI * radial_term(a, r1, rho) * heat_kernel_shell_average(b, rho, r3)
                    + 4.0 * PI * radial_term(a, r1, rho) * radial_term(b, rho, r3);
                rho * rho * terms * self.factor(t, r1, rho, r3)
            })
        };
        Ok(integral)
    }

    /// `e^{g(t2,z) − g(t1,x1)} e^{g(t3,x3) − g(t2,z)}` written out as mass ratios.
    fn factor(&self, t: (f64, f64, f64), r1: f64, rho: f64, r3: f64) -> f64 {
        let (t1, t2, t3) = t;
        let first = (1.0 + excess_mass(rho, 1.0 - t2)) / self.mass(t1, r1);
        let second = (1.0 + excess_mass(r3, 1.0 - t3)) / self.mass(t2, rho);
        first * second
    }

    /// `max |∂_t Q − L*Q|` at `x = r·e` for directions e at angles 0, π/3,
    /// 2π/3, π from y, where `L*Q = ½ΔQ − r^{−2}∂_r(r² ∂_r g Q)`. All
    /// derivatives are centered differences with step `h`.
    pub fn fokker_planck_residual(&self, s: f64, ry: f64, t_grid: &[f64], r_grid: &[f64], h: f64) -> Result<f64> {
        let y = [ry, 0.0, 0.0];
        let density = |t: f64, x: &Vec3| self.critical_q(s, t, &y, x);
        let drift = |t: f64, r: f64| drift_field(t, r);
        residual(density, drift, s, t_grid, r_grid, h)
    }

    /// Same stencil applied to `p₀(t − s, y, ·)` with zero drift.
    pub fn heat_equation_residual(&self, s: f64, ry: f64, t_grid: &[f64], r_grid: &[f64], h: f64) -> Result<f64> {
        let y = [ry, 0.0, 0.0];
        let density = |t: f64, x: &Vec3| Ok(heat_kernel_3d(t - s, &y, x));
        residual(density, |_, _| Ok(0.0), s, t_grid, r_grid, h)
    }
}

fn residual(
    density: impl Fn(f64, &Vec3) -> Result<f64>,
    drift: impl Fn(f64, f64) -> Result<f64>,
    s: f64,
    t_grid: &[f64],
    r_grid: &[f64],
    h: f64,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(invalid("h", "step must be positive"));
    }
    if let Some(&t) = t_grid.iter().find(|&&t| !(t - h > s && t + h < 1.0)) {
        return Err(invalid("t_grid", format!("t = {t} is not inside (s, 1) by one step")));
    }
    if let Some(&r) = r_grid.iter().find(|&&r| !(r > 2.0 * h)) {
        return Err(invalid("r_grid", format!("r = {r} is too close to the origin")));
    }
    let mut worst = 0.0f64;
    for &t in t_grid {
        for &r in r_grid {
            for theta in [0.0, PI / 3.0, 2.0 * PI / 3.0, PI] {
                let e: Vec3 = [theta.cos(), 0.0, theta.sin()];
                let at = |rr: f64| -> Vec3 { std::array::from_fn(|k| rr * e[k]) };
                let x = at(r);
                let q = density(t, &x)?;
                let dt = (density(t + h, &x)? - density(t - h, &x)?) / (2.0 * h);
                let mut lap = 0.0;
                for k in 0..3 {
                    let mut xp = x;
                    let mut xm = x;
                    xp[k] += h;
                    xm[k] -= h;
                    lap += (density(t, &xp)? - 2.0 * q + density(t, &xm)?) / (h * h);
                }
                let flux = |rr: f64| -> Result<f64> { Ok(rr * rr * drift(t, rr)? * density(t, &at(rr))?) };
                let div = (flux(r + h)? - flux(r - h)?) / (2.0 * h) / (r * r);
                worst = worst.max((dt - (0.5 * lap - div)).abs());
            }
        }
    }
    Ok(worst)
}

/// Outcome of one numerical check, serialized as a defect report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub check: String,
    pub params: serde_json::Value,
    pub defect: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl DefectReport {
    pub fn new(check: &str, params: serde_json::Value, defect: f64, tolerance: f64) -> Self {
        Self {
            check: check.to_string(),
            params,
            defect,
            tolerance,
            pass: defect.is_finite() && defect < tolerance,
        }
    }
}

pub const NORMALIZATION_TOL: f64 = 1e-6;
pub const CHAPMAN_KOLMOGOROV_TOL: f64 = 1e-4;
pub const FOKKER_PLANCK_TOL: f64 = 1e-3;
pub const ORIGIN_DRIFT_TOL: f64 = 1e-3;

/// Fokker–Planck defect stencil step and the grids it is evaluated on.
pub const FP_STEP: f64 = 5e-4;
/// Step for the zero-drift heat-equation analogue of the residual check.
pub const HEAT_STEP: f64 = 5e-5;
pub const HEAT_TOL: f64 = 1e-6;
pub const FP_T_GRID: [f64; 4] = [0.3, 0.5, 0.7, 0.9];
pub const FP_R_GRID: [f64; 6] = [0.2, 0.5, 1.0, 1.5, 2.0, 3.0];

/// Normalization, Chapman–Kolmogorov, Fokker–Planck and origin-drift checks.
/// `refine` halves the difference step and doubles the quadrature order, and
/// reports the ratio of coarse to refined Fokker–Planck residuals.
pub fn default_suite(kernel: &CriticalKernel, refine: bool) -> Result<Vec<DefectReport>> {
    let k = if refine { kernel.refined() } else { *kernel };
    let mut out = Vec::new();
    for s in [0.0, 0.3] {
        for t in [0.5, 1.0] {
            for ry in [0.0, 0.3, 1.0, 3.0] {
                let defect = (k.normalization(s, t, ry)? - 1.0).abs();
                out.push(DefectReport::new(
                    "normalization",
                    json!({"s": s, "t": t, "y": ry}),
                    defect,
                    NORMALIZATION_TOL,
                ));
            }
        }
    }
    let q0 = k.critical_q(0.2, 0.7, &[1.0, 0.0, 0.0], &[0.0; 3])?;
    out.push(DefectReport::new("q_at_origin", json!({"s": 0.2, "t": 0.7, "y": 1.0}), q0.abs(), 1e-300));
    let points: [Vec3; 4] = [[1.0, 0.0, 0.0], [0.3, 0.7, 0.2], [-0.5, 0.1, 0.0], [0.0, 0.0, 2.0]];
    for triple in [(0.1, 0.4, 0.8), (0.0, 0.5, 1.0), (0.3, 0.6, 0.9)] {
        let mut worst = 0.0f64;
        for x1 in points.iter().chain(std::iter::once(&[0.0; 3])) {
            for x3 in &points {
                let lhs = k.chapman_kolmogorov(triple, x1, x3)?;
                let rhs = k.critical_q(triple.0, triple.2, x1, x3)?;
                worst = worst.max((lhs - rhs).abs());
            }
        }
        out.push(DefectReport::new(
            "chapman_kolmogorov",
            json!({"t1": triple.0, "t2": triple.1, "t3": triple.2}),
            worst,
            CHAPMAN_KOLMOGOROV_TOL,
        ));
    }
    let coarse = k.fokker_planck_residual(0.1, 1.0, &FP_T_GRID, &FP_R_GRID, FP_STEP)?;
    let step = if refine { 0.5 * FP_STEP } else { FP_STEP };
    let fp = if refine {
        k.fokker_planck_residual(0.1, 1.0, &FP_T_GRID, &FP_R_GRID, step)?
    } else {
        coarse
    };
    let ratio = if refine { Some(coarse / fp) } else { None };
    out.push(DefectReport::new(
        "fokker_planck",
        json!({"s": 0.1, "y": 1.0, "h": step, "ratio": ratio}),
        fp,
        FOKKER_PLANCK_TOL,
    ));
    let heat = k.heat_equation_residual(0.1, 1.0, &FP_T_GRID, &FP_R_GRID, HEAT_STEP)?;
    out.push(DefectReport::new("heat_equation", json!({"s": 0.1, "y": 1.0, "h": HEAT_STEP}), heat, HEAT_TOL));
    let r = 1e-4;
    let drift = (r * drift_field(0.5, r)? + 1.0).abs();
    out.push(DefectReport::new("origin_drift", json!({"t": 0.5, "r": r}), drift, ORIGIN_DRIFT_TOL));
    Ok(out)
}
