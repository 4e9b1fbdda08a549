//! Transition densities of the polymer measure computed from PDE solutions.

use serde::{Deserialize, Serialize};

use crate::birman_schwinger::{BirmanSchwinger, Eigenfunction};
use crate::error::{invalid, Result};
use crate::feynman_kac_pde::{FeynmanKac, OutputPlan};
use crate::field::RadialField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionCheck {
    /// `∫ q dx`.
    pub integral: f64,
    /// `|∫ q dx − 1|`.
    pub defect: f64,
}

fn final_field(fk: &FeynmanKac, init: &[f64], t: f64) -> Result<Vec<f64>> {
    let res = fk.evolve(init, &OutputPlan::new(vec![t]).with_fields())?;
    Ok(res.fields.into_iter().next().expect("one field").value)
}

/// `q((s,y),(t,x)) = p_β(t−s, y, x) Z_{β,T−t}(x) / Z_{β,T−s}(y)` integrated over x.
/// `Z_{β,T−s}(y)` is averaged against the same smoothed delta that starts p_β.
pub fn q_transition_check(fk: &FeynmanKac, s: f64, t: f64, y: f64, horizon: f64) -> Result<TransitionCheck> {
    if !(0.0 <= s && s < t && t <= horizon) {
        return Err(invalid("times", format!("need 0 <= s < t <= T, got s={s}, t={t}, T={horizon}")));
    }
    let grid = fk.grid();
    let delta = grid.delta(y)?;
    let p = final_field(fk, &delta, t - s)?;
    let ones = vec![1.0; grid.len()];
    let z = fk.evolve(&ones, &OutputPlan::new(vec![horizon - t, horizon - s]).with_fields())?;
    let z_t = &z.fields[0].value;
    let z_s = grid.integrate(&delta.iter().zip(&z.fields[1].value).map(|(a, b)| a * b).collect::<Vec<_>>());
    let integrand: Vec<f64> = p.iter().zip(z_t).map(|(a, b)| a * b).collect();
    let integral = grid.integrate(&integrand) / z_s;
    Ok(TransitionCheck {
        integral,
        defect: (integral - 1.0).abs(),
    })
}

fn log_derivative(r: &[f64], u: &[f64], i: usize) -> f64 {
    (u[i + 1].ln() - u[i - 1].ln()) / (r[i + 1] - r[i - 1])
}

/// Relative max-norm gap on `0 < r ≤ r_max` between `∂_r ln Z_{β,τ}` and
/// `∂_r ln ψ_β`, normalized by `max |∂_r ln ψ_β|`.
pub fn log_gradient_defect(bs: &BirmanSchwinger, ef: &Eigenfunction, fk: &FeynmanKac, tau: f64, r_max: f64) -> Result<f64> {
    let grid = fk.grid();
    let z = final_field(fk, &vec![1.0; grid.len()], tau)?;
    let r = grid.r();
    let h = 1e-5;
    let (mut gap, mut scale) = (0.0f64, 0.0f64);
    for i in 1..r.len() - 1 {
        if r[i] > r_max {
            break;
        }
        let dz = log_derivative(r, &z, i);
        let lo = bs.eigenfunction_at(ef, (r[i] - h).max(0.0));
        let hi = bs.eigenfunction_at(ef, r[i] + h);
        let dpsi = (hi.ln() - lo.ln()) / (r[i] + h - (r[i] - h).max(0.0));
        gap = gap.max((dz - dpsi).abs());
        scale = scale.max(dpsi.abs());
    }
    Ok(gap / scale)
}

/// `r_β(t, y, ·) = p_β(t, y, ·) ψ_β e^{−λ₀t} / ψ_β(y)` on the PDE grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitingDensity {
    pub field: RadialField,
    pub integral: f64,
}

/// ψ_β(y) is taken as its average against the smoothed delta, which is the
/// value consistent with the discrete initial datum.
pub fn limiting_process_density(bs: &BirmanSchwinger, ef: &Eigenfunction, fk: &FeynmanKac, t: f64, y: f64) -> Result<LimitingDensity> {
    let grid = fk.grid();
    let delta = grid.delta(y)?;
    let psi = bs.eigenfunction_field(ef, grid.r().to_vec()).value;
    let psi_y = grid.integrate(&delta.iter().zip(&psi).map(|(a, b)| a * b).collect::<Vec<_>>());
    let p = final_field(fk, &delta, t)?;
    let decay = (-ef.lambda0 * t).exp();
    let value: Vec<f64> = p.iter().zip(&psi).map(|(a, b)| a * b * decay / psi_y).collect();
    let integral = grid.integrate(&value);
    Ok(LimitingDensity {
        field: RadialField::new(grid.dimension(), grid.r().to_vec(), value),
        integral,
    })
}

/// Relative defect of `∫ψ_β²(y) r_β(t,y,x) dy = ψ_β²(x)` on `r ≤ r_max`.
/// By symmetry of p_β the left side is `ψ_β(x) e^{−λ₀t} (P_t ψ_β)(x)`.
pub fn stationarity_defect(bs: &BirmanSchwinger, ef: &Eigenfunction, fk: &FeynmanKac, t: f64, r_max: f64) -> Result<f64> {
    let grid = fk.grid();
    let psi = bs.eigenfunction_field(ef, grid.r().to_vec()).value;
    let u = final_field(fk, &psi, t)?;
    let decay = (-ef.lambda0 * t).exp();
    let (mut gap, mut scale) = (0.0f64, 0.0f64);
    for ((&r, &p), &ui) in grid.r().iter().zip(&psi).zip(&u) {
        if r > r_max {
            break;
        }
        gap = gap.max((p * ui * decay - p * p).abs());
        scale = scale.max(p * p);
    }
    Ok(gap / scale)
}
