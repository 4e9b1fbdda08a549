//! Modified Bessel functions for the orders that occur in dimensions d ≤ 5.
//!
//! `K_0`, `K_1`: power series for z ≤ 2, Steed's continued fraction (CF2)
//! above. Half-integer orders use their elementary closed forms. `I_ν` is
//! only needed exponentially scaled, as `e^{-z} I_ν(z)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_SWITCH: f64 = 2.0;

/// Orders of `K_ν` supported: ν = d/2 − 1 for d = 2..5, plus ν = 1 as the
/// companion of ν = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselOrder {
    Zero,
    Half,
    One,
    ThreeHalves,
}

impl BesselOrder {
    pub fn from_nu(nu: f64) -> Result<Self> {
        match nu {
            x if x == 0.0 => Ok(Self::Zero),
            x if x == 0.5 => Ok(Self::Half),
            x if x == 1.0 => Ok(Self::One),
            x if x == 1.5 => Ok(Self::ThreeHalves),
            _ => Err(Error::UnsupportedOrder(nu)),
        }
    }

    pub fn nu(self) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Half => 0.5,
            Self::One => 1.0,
            Self::ThreeHalves => 1.5,
        }
    }
}

/// `K_ν(z)` for ν ∈ {0, 1/2, 1, 3/2}, z > 0.
pub fn modified_bessel_k(nu: f64, z: f64) -> Result<f64> {
    let order = BesselOrder::from_nu(nu)?;
    if !(z > 0.0) || !z.is_finite() {
        return Err(crate::error::invalid("z", format!("must be positive and finite, got {z}")));
    }
    Ok(bessel_k(order, z))
}

pub fn bessel_k(order: BesselOrder, z: f64) -> f64 {
    if z <= SERIES_SWITCH {
        match order {
            BesselOrder::Zero => k0_series(z),
            BesselOrder::One => k1_series(z),
            _ => bessel_k_scaled(order, z) * (-z).exp(),
        }
    } else {
        bessel_k_scaled(order, z) * (-z).exp()
    }
}

/// `e^{z} K_ν(z)`.
pub fn bessel_k_scaled(order: BesselOrder, z: f64) -> f64 {
    match order {
        BesselOrder::Half => (PI / (2.0 * z)).sqrt(),
        BesselOrder::ThreeHalves => (PI / (2.0 * z)).sqrt() * (1.0 + 1.0 / z),
        BesselOrder::Zero | BesselOrder::One if z <= SERIES_SWITCH => {
            let k = if order == BesselOrder::Zero { k0_series(z) } else { k1_series(z) };
            k * z.exp()
        }
        BesselOrder::Zero => steed_k01_scaled(z).0,
        BesselOrder::One => steed_k01_scaled(z).1,
    }
}

fn i0_i1_series(z: f64) -> (f64, f64) {
    let q = 0.25 * z * z;
    let (mut t0, mut t1) = (1.0, 0.5 * z);
    let (mut s0, mut s1) = (t0, t1);
    for k in 1..200 {
        let kf = k as f64;
        t0 *= q / (kf * kf);
        t1 *= q / (kf * (kf + 1.0));
        s0 += t0;
        s1 += t1;
        if t0 < 1e-17 * s0 && t1 < 1e-17 * s1 {
            break;
        }
    }
    (s0, s1)
}

fn k0_series(z: f64) -> f64 {
    let q = 0.25 * z * z;
    let (i0, _) = i0_i1_series(z);
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut sum = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * kf);
        harmonic += 1.0 / kf;
        let add = term * harmonic;
        sum += add;
        if add < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    -((0.5 * z).ln() + EULER_GAMMA) * i0 + sum
}

fn k1_series(z: f64) -> f64 {
    let q = 0.25 * z * z;
    let (_, i1) = i0_i1_series(z);
    // ψ(k+1) + ψ(k+2) = −2γ + H_k + H_{k+1}
    let mut term = 1.0; // q^k / (k! (k+1)!)
    let mut h_k = 0.0;
    let mut sum = -2.0 * EULER_GAMMA + 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * (kf + 1.0));
        h_k += 1.0 / kf;
        let add = term * (-2.0 * EULER_GAMMA + 2.0 * h_k + 1.0 / (kf + 1.0));
        sum += add;
        if add.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    1.0 / z + (0.5 * z).ln() * i1 - 0.25 * z * sum
}

/// Steed's CF2 for (e^z K_0(z), e^z K_1(z)), z ≥ 2.
fn steed_k01_scaled(z: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + z);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let (mut q1, mut q2) = (0.0, 1.0);
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * z)).sqrt() / s;
    let k1 = k0 * (z + 0.5 - h) / z;
    (k0, k1)
}

/// `e^{-z} I_ν(z)` for ν ∈ {−1/2, 0, 1/2, 1, 3/2}, z ≥ 0.
pub fn bessel_i_scaled(nu: f64, z: f64) -> Result<f64> {
    let gamma_nu_plus_1 = match nu {
        x if x == -0.5 => PI.sqrt(),
        x if x == 0.0 || x == 1.0 => 1.0,
        x if x == 0.5 => 0.5 * PI.sqrt(),
        x if x == 1.5 => 0.75 * PI.sqrt(),
        _ => return Err(Error::UnsupportedOrder(nu)),
    };
    if z < 0.0 {
        return Err(crate::error::invalid("z", "must be nonnegative"));
    }
    if z == 0.0 {
        return Ok(match nu {
            x if x == 0.0 => 1.0,
            x if x == -0.5 => f64::INFINITY,
            _ => 0.0,
        });
    }
    // Half-integer closed forms where they are free of cancellation.
    let pref = (2.0 / (PI * z)).sqrt();
    let e2 = (-2.0 * z).exp();
    if nu == -0.5 {
        return Ok(pref * 0.5 * (1.0 + e2));
    }
    if nu == 0.5 {
        return Ok(pref * 0.5 * -(-2.0 * z).exp_m1());
    }
    if nu == 1.5 && z >= 1.0 {
        return Ok(pref * (0.5 * (1.0 + e2) + 0.5 * (-2.0 * z).exp_m1() / z));
    }
    if z > 30.0 {
        return Ok(i_scaled_asymptotic(nu, z));
    }
    let q = 0.25 * z * z;
    let mut term = (0.5 * z).powf(nu) / gamma_nu_plus_1;
    let mut sum = term;
    for k in 1..500 {
        let kf = k as f64;
        term *= q / (kf * (kf + nu));
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    Ok(sum * (-z).exp())
}

fn i_scaled_asymptotic(nu: f64, z: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        let next = -term * (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * z);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * z).sqrt()
}
