//! Free resolvent and heat kernels of ½Δ in ℝ^d, d ≤ 5.
//!
//! Conventions: `R₀(λ) = (½Δ − λ)⁻¹`, so every resolvent kernel is negative,
//! and `κ = √(2λ)` is the decay rate. Radial reductions integrate a kernel
//! over the unit sphere: for |x| = r, |y| = s,
//! `shell(r, s) = ∫_{S^{d−1}} k(|r ω₀ − s ω|) dω`.

mod bessel;

use std::f64::consts::PI;

pub use bessel::{bessel_i_scaled, bessel_k, bessel_k_scaled, modified_bessel_k, BesselOrder};

use crate::dimension::Dimension;
use crate::error::{invalid, Error, Result};

/// `a_d` in `R₀(0, x) = −a_d |x|^{2−d}`, i.e. `Γ(d/2 − 1) / (2π^{d/2})`.
pub fn zero_energy_coefficient(d: Dimension) -> Result<f64> {
    d.require_transient()?;
    Ok(match d.get() {
        3 => 1.0 / (2.0 * PI),
        4 => 1.0 / (2.0 * PI * PI),
        5 => 1.0 / (4.0 * PI * PI),
        _ => unreachable!(),
    })
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

/// Kernel of `R₀(λ)` at distance `r`.
pub fn free_resolvent_kernel(d: Dimension, lambda: f64, r: f64) -> Result<f64> {
    check_lambda(d, lambda)?;
    if !(r >= 0.0) {
        return Err(invalid("r", format!("must be >= 0, got {r}")));
    }
    if r == 0.0 && d.get() >= 2 {
        return Err(Error::SingularPoint(d.get()));
    }
    let kappa = (2.0 * lambda).sqrt();
    let z = kappa * r;
    Ok(match d.get() {
        1 => -(-z).exp() / kappa,
        2 => -bessel_k(BesselOrder::Zero, z) / PI,
        3 => -(-z).exp() / (2.0 * PI * r),
        4 if lambda == 0.0 => -1.0 / (2.0 * PI * PI * r * r),
        4 => -kappa * bessel_k(BesselOrder::One, z) / (2.0 * PI * PI * r),
        5 => -(-z).exp() * (1.0 + z) / (4.0 * PI * PI * r.powi(3)),
        _ => unreachable!(),
    })
}

/// `p₀(t, x) = (2πt)^{−d/2} e^{−r²/2t}`.
pub fn heat_kernel(d: Dimension, t: f64, r: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid("t", format!("must be > 0, got {t}")));
    }
    Ok(heat_kernel_unchecked(d, t, r))
}

pub(crate) fn heat_kernel_unchecked(d: Dimension, t: f64, r: f64) -> f64 {
    (2.0 * PI * t).powf(-0.5 * d.as_f64()) * (-0.5 * r * r / t).exp()
}

/// Zero-energy kernels `(P_d, Q_d)` at separation `r`: `P_d = −R₀(0)` and `Q_d`
/// the first correction in the small-λ expansion of `−A(λ)`
/// (√λ for d = 3, λ ln(1/λ) for d = 4, λ for d = 5).
pub fn zero_energy_kernels(d: Dimension, r: f64) -> Result<(f64, f64)> {
    let a = zero_energy_coefficient(d)?;
    if !(r > 0.0) {
        return Err(Error::SingularPoint(d.get()));
    }
    let p = a * r.powi(2 - d.get() as i32);
    let q = match d.get() {
        3 => -1.0 / (2f64.sqrt() * PI),
        4 => -1.0 / (4.0 * PI * PI),
        5 => -a / r,
        _ => unreachable!(),
    };
    Ok((p, q))
}

/// `−∫_{S^{d−1}} R₀(λ, |r ω₀ − s ω|) dω`, which is positive.
///
/// Equals `2 (rs)^{−ν} I_ν(κ r_<) K_ν(κ r_>)` with ν = d/2 − 1; at λ = 0 and
/// d ≥ 3 it is `2 / ((d − 2) r_>^{d−2})`.
pub fn shell_resolvent(d: Dimension, lambda: f64, r: f64, s: f64) -> Result<f64> {
    check_lambda(d, lambda)?;
    let (lo, hi) = if r <= s { (r, s) } else { (s, r) };
    if !(lo >= 0.0) {
        return Err(invalid("r", "radii must be >= 0"));
    }
    if hi == 0.0 && d.get() >= 2 {
        return Err(Error::SingularPoint(d.get()));
    }
    Ok(shell_resolvent_unchecked(d, lambda, lo, hi))
}

/// Same as [`shell_resolvent`] with `lo <= hi` and validated arguments.
pub(crate) fn shell_resolvent_unchecked(d: Dimension, lambda: f64, lo: f64, hi: f64) -> f64 {
    let dd = d.get();
    if lambda == 0.0 {
        return 2.0 / ((dd as f64 - 2.0) * hi.powi(dd as i32 - 2));
    }
    let kappa = (2.0 * lambda).sqrt();
    let gap = (-kappa * (hi - lo)).exp();
    if lo == 0.0 {
        // I_ν(z) z^{−ν} → 2^{−ν}/Γ(ν+1); the shell collapses to a point.
        return -d.sphere_area() * free_resolvent_kernel(d, lambda, hi).unwrap_or(f64::NAN);
    }
    match dd {
        1 => gap * (1.0 + (-2.0 * kappa * lo).exp()) / kappa,
        3 => gap * -(-2.0 * kappa * lo).exp_m1() / (kappa * lo * hi),
        _ => {
            let nu = d.bessel_order();
            let order = BesselOrder::from_nu(nu).expect("orders for d = 2, 4, 5 are supported");
            let i = bessel_i_scaled(nu, kappa * lo).expect("supported order");
            let k = bessel_k_scaled(order, kappa * hi);
            2.0 * (lo * hi).powf(-nu) * i * k * gap
        }
    }
}

/// `∫_{S^{d−1}} p₀(t, |r ω₀ − s ω|) dω`.
pub fn shell_heat_kernel(d: Dimension, t: f64, r: f64, s: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid("t", format!("must be > 0, got {t}")));
    }
    if !(r >= 0.0 && s >= 0.0) {
        return Err(invalid("r", "radii must be >= 0"));
    }
    Ok(shell_heat_kernel_unchecked(d, t, r, s))
}

pub(crate) fn shell_heat_kernel_unchecked(d: Dimension, t: f64, r: f64, s: f64) -> f64 {
    let rs = r * s;
    if rs == 0.0 {
        return d.sphere_area() * heat_kernel_unchecked(d, t, r.max(s));
    }
    let z = rs / t;
    let nu = d.bessel_order();
    let gauss = (-0.5 * (r - s) * (r - s) / t).exp();
    let i = bessel_i_scaled(nu, z).expect("orders d/2 - 1 are supported");
    t.powf(-0.5 * d.as_f64()) * (t / rs).powf(nu) * gauss * i
}

/// `∫_{S⁴} |r ω₀ − s ω|⁻¹ dω` in ℝ⁵.
pub fn shell_inverse_distance_r5(r: f64, s: f64) -> f64 {
    let (lo, hi) = if r <= s { (r, s) } else { (s, r) };
    let q = lo / hi;
    let area = Dimension::FIVE.sphere_area();
    if q == 0.0 {
        return area / hi;
    }
    if q < 0.3 {
        // The closed form cancels badly for small q; the μ-integrand is smooth here.
        let gl = crate::quadrature::GaussLegendre::new(24);
        let sphere3 = 2.0 * PI * PI;
        let integral = gl.integrate(-1.0, 1.0, |mu| {
            (1.0 - mu * mu) / (1.0 + q * q - 2.0 * q * mu).sqrt()
        });
        return sphere3 * integral / hi;
    }
    // Closed form of ∫(1 − μ²)(a − bμ)^{−1/2} dμ in u = a − bμ.
    let a = 1.0 + q * q;
    let b = 2.0 * q;
    let anti = |u: f64| {
        let su = u.sqrt();
        2.0 * (b * b - a * a) * su + (4.0 * a / 3.0) * u * su - 0.4 * u * u * su
    };
    let u1 = (1.0 - q) * (1.0 - q);
    let u2 = (1.0 + q) * (1.0 + q);
    let sphere3 = 2.0 * PI * PI;
    sphere3 * (anti(u2) - anti(u1)) / (b * b * b) / hi
}
